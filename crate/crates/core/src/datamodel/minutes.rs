use super::{Appearance, PlayerId};

/// Length of the intersection of a set of `[on, off]` intervals.
pub fn interval_overlap(intervals: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut any = false;
    for (on, off) in intervals {
        any = true;
        lo = lo.max(on);
        hi = hi.min(off);
    }
    if !any {
        return 0.0;
    }
    (hi - lo).max(0.0)
}

/// Minutes during which every listed player was on the pitch in the match
/// whose appearances are given. A player without an appearance yields 0.
pub fn shared_minutes(appearances: &[Appearance], players: &[&PlayerId]) -> f64 {
    let mut intervals = Vec::with_capacity(players.len());
    for p in players {
        match appearances.iter().find(|a| a.player_id == **p) {
            Some(a) => intervals.push((a.minute_on, a.minute_off)),
            None => return 0.0,
        }
    }
    interval_overlap(intervals)
}
