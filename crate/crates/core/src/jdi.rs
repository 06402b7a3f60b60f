//! Joint defensive impact.
//!
//! Each opponent's offensive impact is compared with what was expected of
//! them from earlier matches in the same competition-season (blended with a
//! position prior while they have little history). The difference is credited
//! to the defending pairs in proportion to their responsibility for that
//! opponent, derived from positional distance on the 5-by-5 grid.

use std::collections::BTreeMap;

use crate::datamodel::{shared_minutes, Action, Appearance, MatchId, PairKey, PlayerId, Position, TeamId};

/// Minutes of history at which the empirical rate fully replaces the prior.
pub const PRIOR_MINUTES_THRESHOLD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JdiConfig {
    /// Difference the expectation against the raw match OI instead of the
    /// per-90 rescaled value.
    pub raw_actual: bool,
    /// Normalize pair shares to sum to one per (match, opponent).
    pub normalize_shares: bool,
    pub prior_threshold_minutes: f64,
}

impl Default for JdiConfig {
    fn default() -> Self {
        Self {
            raw_actual: false,
            normalize_shares: true,
            prior_threshold_minutes: PRIOR_MINUTES_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffensiveImpact {
    pub player_id: PlayerId,
    pub match_id: MatchId,
    pub actual: f64,
    pub minutes: f64,
}

/// Sum of the player's offensive action values in one match.
pub fn actual_oi(p: &PlayerId, actions: &[Action]) -> f64 {
    actions
        .iter()
        .filter(|a| a.player_id == *p && a.action_type.is_offensive())
        .fold(0.0, |acc, a| acc + a.value)
}

/// Running offensive totals of one player.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImpactHistory {
    pub oi: f64,
    pub minutes: f64,
}

impl ImpactHistory {
    pub fn add(&mut self, oi: f64, minutes: f64) {
        self.oi += oi;
        self.minutes += minutes;
    }

    /// Per-90 rate, 0 without minutes.
    pub fn rate(&self) -> f64 {
        if self.minutes > 0.0 {
            self.oi * 90.0 / self.minutes
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedImpact {
    pub player_id: PlayerId,
    pub match_id: MatchId,
    pub prior_minutes: f64,
    pub empirical_rate: f64,
    pub prior: f64,
    pub weight: f64,
    pub blended: f64,
}

/// Blends a player's history with a position prior. The weight grows
/// linearly with history minutes and saturates at `threshold`.
pub fn expected_oi(p: &PlayerId, m: &MatchId, history: ImpactHistory, prior: f64, threshold: f64) -> ExpectedImpact {
    let empirical_rate = history.rate();
    let weight = history.minutes.min(threshold) / threshold;
    let blended = if weight >= 1.0 {
        empirical_rate
    } else if weight <= 0.0 {
        prior
    } else {
        weight * empirical_rate + (1.0 - weight) * prior
    };
    ExpectedImpact {
        player_id: p.clone(),
        match_id: m.clone(),
        prior_minutes: history.minutes,
        empirical_rate,
        prior,
        weight,
        blended,
    }
}

/// Offensive impact and minutes accumulated per position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PositionCorpus {
    by_position: BTreeMap<Position, ImpactHistory>,
}

impl PositionCorpus {
    pub fn add(&mut self, position: Position, oi: f64, minutes: f64) {
        self.by_position.entry(position).or_default().add(oi, minutes);
    }

    /// Minutes-weighted mean OI per 90 for the position.
    pub fn rate(&self, position: Position) -> Option<f64> {
        self.by_position
            .get(&position)
            .filter(|h| h.minutes > 0.0)
            .map(ImpactHistory::rate)
    }

    pub fn is_empty(&self) -> bool {
        self.by_position.values().all(|h| h.minutes <= 0.0)
    }
}

/// Position-specific prior: the local corpus (earlier matches of the same
/// competition-season) when it covers the position, otherwise the global
/// corpus, otherwise 0.
pub fn position_prior(position: Position, local: &PositionCorpus, global: &PositionCorpus) -> f64 {
    local.rate(position).or_else(|| global.rate(position)).unwrap_or(0.0)
}

/// Individual responsibility of a defender for an opponent: `1 / (1 + d)`
/// with `d` the grid distance after mirroring the opponent into the
/// defender's frame. `None` when either is a goalkeeper.
pub fn responsibility_individual(defender: Position, opponent: Position) -> Option<f64> {
    let d = defender.grid()?.cell();
    let o = opponent.grid()?.cell().mirrored();
    Some(1.0 / (1.0 + d.distance(o)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityShare {
    pub pair: PairKey,
    pub opponent: PlayerId,
    pub match_id: MatchId,
    pub raw: f64,
    pub normalized: f64,
    /// Minutes the pair and the opponent were all on the pitch.
    pub minutes: f64,
}

/// Shares of every eligible defending pair for one opponent in one match.
/// Eligible pairs are two outfield players of the other team who shared
/// the pitch with the opponent for a positive number of minutes.
pub fn responsibility_shares(
    appearances: &[Appearance],
    opponent: &Appearance,
    normalize: bool,
) -> Vec<ResponsibilityShare> {
    if opponent.position.grid().is_none() {
        return Vec::new();
    }
    let defenders: Vec<&Appearance> = appearances
        .iter()
        .filter(|a| a.team_id != opponent.team_id && a.position.grid().is_some())
        .collect();
    let mut shares = Vec::new();
    for (i, p) in defenders.iter().enumerate() {
        for q in &defenders[i + 1..] {
            let minutes = shared_minutes(appearances, &[&p.player_id, &q.player_id, &opponent.player_id]);
            if minutes <= 0.0 {
                continue;
            }
            let (Some(rp), Some(rq)) = (
                responsibility_individual(p.position, opponent.position),
                responsibility_individual(q.position, opponent.position),
            ) else {
                continue;
            };
            let raw = (rp + rq) / 2.0;
            shares.push(ResponsibilityShare {
                pair: PairKey::of(&p.player_id, &q.player_id),
                opponent: opponent.player_id.clone(),
                match_id: opponent.match_id.clone(),
                raw,
                normalized: raw,
                minutes,
            });
        }
    }
    if normalize {
        let total: f64 = shares.iter().map(|s| s.raw).sum();
        if total > 0.0 {
            for s in &mut shares {
                s.normalized = s.raw / total;
            }
        }
    }
    shares
}

/// Share of the pair `(p, q)` for opponent `o`, if the pair is eligible.
pub fn responsibility_pair(
    p: &PlayerId,
    q: &PlayerId,
    o: &PlayerId,
    appearances: &[Appearance],
    normalize: bool,
) -> Option<ResponsibilityShare> {
    let opponent = appearances.iter().find(|a| a.player_id == *o)?;
    let key = PairKey::of(p, q);
    responsibility_shares(appearances, opponent, normalize)
        .into_iter()
        .find(|s| s.pair == key)
}

/// One opponent's over- or under-performance in a match.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentDelta {
    pub opponent: PlayerId,
    pub team_id: TeamId,
    pub match_id: MatchId,
    pub expected: f64,
    pub actual_oi: f64,
    pub minutes: f64,
    /// The actual value that was differenced: per-90 or raw.
    pub actual_compared: f64,
    /// Expected minus actual; positive when the opponent underperformed.
    pub delta: f64,
}

impl OpponentDelta {
    pub fn new(expected: &ExpectedImpact, appearance: &Appearance, actual_oi: f64, raw_actual: bool) -> Self {
        let minutes = appearance.minutes();
        let actual_compared = if raw_actual || minutes <= 0.0 {
            actual_oi
        } else {
            actual_oi * 90.0 / minutes
        };
        Self {
            opponent: appearance.player_id.clone(),
            team_id: appearance.team_id.clone(),
            match_id: appearance.match_id.clone(),
            expected: expected.blended,
            actual_oi,
            minutes,
            actual_compared,
            delta: expected.blended - actual_compared,
        }
    }
}

/// JDI of every eligible defending pair in one match, given the deltas of
/// the opponents they faced (either team; each delta is credited to the
/// other side's pairs).
pub fn jdi_by_pair(appearances: &[Appearance], deltas: &[OpponentDelta], normalize: bool) -> BTreeMap<PairKey, f64> {
    let mut out: BTreeMap<PairKey, f64> = BTreeMap::new();
    for d in deltas {
        let Some(opponent) = appearances.iter().find(|a| a.player_id == d.opponent) else {
            continue;
        };
        for s in responsibility_shares(appearances, opponent, normalize) {
            *out.entry(s.pair).or_insert(0.0) += d.delta * s.normalized * s.minutes / 90.0;
        }
    }
    out
}

/// JDI of one pair in one match.
pub fn jdi_match(
    p: &PlayerId,
    q: &PlayerId,
    appearances: &[Appearance],
    deltas: &[OpponentDelta],
    normalize: bool,
) -> f64 {
    let key = PairKey::of(p, q);
    jdi_by_pair(appearances, deltas, normalize)
        .get(&key)
        .copied()
        .unwrap_or(0.0)
}

/// JDI90 from per-match `(JDI_m, MINS_m)` tuples over a season.
pub fn jdi90(per_match: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    crate::joi::per90(per_match)
}
