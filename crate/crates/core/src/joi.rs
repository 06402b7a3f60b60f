//! Joint offensive impact: value created by two teammates acting in
//! immediate succession.

use std::collections::BTreeMap;

use crate::datamodel::{Action, MatchId, PairKey, PlayerId, TeamId};

/// Two consecutive offensive actions by two distinct teammates.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub match_id: MatchId,
    pub team_id: TeamId,
    /// Index of the first action in the match's action slice.
    pub first_action: usize,
    pub second_action: usize,
    pub first_player: PlayerId,
    pub second_player: PlayerId,
    pub value: f64,
}

impl Interaction {
    pub fn pair(&self) -> PairKey {
        PairKey::of(&self.first_player, &self.second_player)
    }

    pub fn involves(&self, p: &PlayerId, q: &PlayerId) -> bool {
        (self.first_player == *p && self.second_player == *q) || (self.first_player == *q && self.second_player == *p)
    }
}

/// Extracts interactions from one match's sorted actions.
///
/// Adjacency is evaluated on the interleaved sequence of both teams'
/// offensive actions, so an opponent action in between breaks a chain.
/// Interactions never span the half-time break.
pub fn extract_interactions(actions: &[Action]) -> Vec<Interaction> {
    let offensive: Vec<usize> = actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.action_type.is_offensive())
        .map(|(i, _)| i)
        .collect();
    offensive
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (&actions[w[0]], &actions[w[1]]);
            let linked = a.team_id == b.team_id && a.player_id != b.player_id && a.period == b.period;
            linked.then(|| Interaction {
                match_id: a.match_id.clone(),
                team_id: a.team_id.clone(),
                first_action: w[0],
                second_action: w[1],
                first_player: a.player_id.clone(),
                second_player: b.player_id.clone(),
                value: a.value + b.value,
            })
        })
        .collect()
}

/// JOI of `p` and `q` in one match, regardless of who initiated.
pub fn joi_match(p: &PlayerId, q: &PlayerId, interactions: &[Interaction]) -> f64 {
    interactions
        .iter()
        .filter(|i| i.involves(p, q))
        .fold(0.0, |acc, i| acc + i.value)
}

/// Per-pair JOI and interaction count for one match. Summation follows the
/// interaction order, so each entry equals [`joi_match`] bit for bit.
pub fn joi_by_pair(interactions: &[Interaction]) -> BTreeMap<PairKey, (f64, u32)> {
    let mut out: BTreeMap<PairKey, (f64, u32)> = BTreeMap::new();
    for i in interactions {
        let e = out.entry(i.pair()).or_insert((0.0, 0));
        e.0 += i.value;
        e.1 += 1;
    }
    out
}

/// Per-90 normalization shared by JOI90 and JDI90: `Σ impact · 90 / Σ minutes`.
/// Returns `None` when the pair shared no minutes.
pub fn per90(per_match: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let (impact, minutes) = per_match
        .into_iter()
        .fold((0.0, 0.0), |(i, m), (di, dm)| (i + di, m + dm));
    (minutes > 0.0).then(|| impact * 90.0 / minutes)
}

/// JOI90 from per-match `(JOI_m, MINS_m)` tuples over a season.
pub fn joi90(per_match: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    per90(per_match)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::datamodel::{ActionResult, ActionType, BodyPart, PitchPoint};

    pub(crate) fn act(team: &str, player: &str, t: ActionType, value: f64, seconds: f64) -> Action {
        Action {
            match_id: "m".into(),
            period: 1,
            seconds,
            team_id: team.into(),
            player_id: player.into(),
            action_type: t,
            result: ActionResult::Success,
            body_part: BodyPart::Foot,
            start: PitchPoint { x: 50.0, y: 34.0 },
            end: PitchPoint { x: 60.0, y: 30.0 },
            value,
        }
    }

    #[test]
    fn pass_then_take_on() {
        let acts = vec![
            act("A", "p", ActionType::Pass, 0.10, 1.0),
            act("A", "q", ActionType::TakeOn, 0.05, 2.0),
        ];
        let ints = extract_interactions(&acts);
        assert_eq!(ints.len(), 1);
        assert!((ints[0].value - 0.15).abs() < 1e-15);
        assert_eq!(ints[0].first_player.as_str(), "p");
    }

    #[test]
    fn different_teams_or_same_player_do_not_interact() {
        let acts = vec![
            act("A", "p", ActionType::Pass, 0.1, 1.0),
            act("B", "r", ActionType::Pass, 0.1, 2.0),
        ];
        assert!(extract_interactions(&acts).is_empty());
        let acts = vec![
            act("A", "p", ActionType::Pass, 0.1, 1.0),
            act("A", "p", ActionType::Pass, 0.1, 2.0),
        ];
        assert!(extract_interactions(&acts).is_empty());
    }

    #[test]
    fn other_actions_are_skipped_and_opponents_break_chains() {
        let acts = vec![
            act("A", "p", ActionType::Pass, 0.1, 1.0),
            act("B", "x", ActionType::Other, 0.5, 2.0),
            act("A", "q", ActionType::Shot, 0.2, 3.0),
            act("B", "y", ActionType::Pass, 0.0, 4.0),
            act("A", "p", ActionType::Pass, 0.3, 5.0),
        ];
        let ints = extract_interactions(&acts);
        assert_eq!(ints.len(), 1);
        assert_eq!((ints[0].first_action, ints[0].second_action), (0, 2));
    }

    #[test]
    fn no_interaction_across_half_time() {
        let mut second = act("A", "q", ActionType::Pass, 0.1, 0.0);
        second.period = 2;
        let acts = vec![act("A", "p", ActionType::Pass, 0.1, 2700.0), second];
        assert!(extract_interactions(&acts).is_empty());
    }

    #[test]
    fn joi_sums_both_directions() {
        let acts = vec![
            act("A", "p", ActionType::Pass, 0.10, 1.0),
            act("A", "q", ActionType::Pass, 0.05, 2.0),
            act("A", "p", ActionType::Pass, 0.00, 3.0),
            act("A", "q", ActionType::Pass, -0.02, 4.0),
        ];
        let ints = extract_interactions(&acts);
        // p->q 0.15, q->p 0.05, p->q -0.02
        assert_eq!(ints.len(), 3);
        let (p, q) = ("p".into(), "q".into());
        let v = joi_match(&p, &q, &ints);
        assert!((v - 0.18).abs() < 1e-12);
        assert_eq!(v, joi_match(&q, &p, &ints));
        assert_eq!(joi_by_pair(&ints)[&PairKey::of(&p, &q)], (v, 3));
        assert_eq!(joi_match(&p, &"z".into(), &ints), 0.0);
    }

    #[test]
    fn joi90_examples() {
        assert!((joi90([(0.30, 90.0)]).unwrap() - 0.30).abs() < 1e-12);
        assert!((joi90([(0.12, 45.0), (0.08, 45.0)]).unwrap() - 0.20).abs() < 1e-12);
        assert_eq!(joi90([(0.1, 0.0)]), None);
        let once = joi90([(0.12, 45.0), (0.08, 30.0)]).unwrap();
        let twice = joi90([(0.12, 45.0), (0.08, 30.0), (0.12, 45.0), (0.08, 30.0)]).unwrap();
        assert!((once - twice).abs() < 1e-12);
    }
}
