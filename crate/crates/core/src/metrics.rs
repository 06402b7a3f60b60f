//! Season-level pair metrics over a whole dataset.
//!
//! Expected offensive impact depends on each player's history, so deltas are
//! produced by a sequential pass per competition-season in date order. Once
//! the deltas are known, every match is independent and computed in parallel;
//! the season aggregation then folds the per-match results in date order.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::datamodel::{
    shared_minutes, CompetitionId, Dataset, MatchId, MatchInfo, PairKey, PairSeasonMetrics, PlayerId, TeamId,
};
use crate::jdi::{expected_oi, jdi_by_pair, position_prior, ImpactHistory, JdiConfig, OpponentDelta, PositionCorpus};
use crate::joi::{extract_interactions, joi_by_pair, per90};

/// Offensive impact of every player who acted in a match.
pub fn match_oi(actions: &[crate::datamodel::Action]) -> BTreeMap<PlayerId, f64> {
    let mut out: BTreeMap<PlayerId, f64> = BTreeMap::new();
    for a in actions.iter().filter(|a| a.action_type.is_offensive()) {
        *out.entry(a.player_id.clone()).or_insert(0.0) += a.value;
    }
    out
}

/// Corpus over every appearance in the dataset, used when a competition-season
/// has no earlier minutes for a position.
pub fn global_corpus(ds: &Dataset) -> PositionCorpus {
    let mut corpus = PositionCorpus::default();
    for m in ds.matches_by_date() {
        let oi = match_oi(ds.match_actions(&m.match_id));
        for a in ds.match_appearances(&m.match_id) {
            corpus.add(a.position, oi.get(&a.player_id).copied().unwrap_or(0.0), a.minutes());
        }
    }
    corpus
}

/// Per-opponent deltas (expected minus actual offensive impact) for every
/// outfield appearance in the dataset, keyed by match.
pub fn opponent_deltas(ds: &Dataset, cfg: &JdiConfig) -> BTreeMap<MatchId, Vec<OpponentDelta>> {
    let global = global_corpus(ds);
    let mut out = BTreeMap::new();
    for matches in ds.competition_seasons().values() {
        let mut local = PositionCorpus::default();
        let mut history: BTreeMap<PlayerId, ImpactHistory> = BTreeMap::new();
        let mut i = 0;
        while i < matches.len() {
            // Matches on the same date do not see each other.
            let date = matches[i].date;
            let mut j = i;
            while j < matches.len() && matches[j].date == date {
                j += 1;
            }
            let day = &matches[i..j];
            let ois: Vec<BTreeMap<PlayerId, f64>> =
                day.iter().map(|m| match_oi(ds.match_actions(&m.match_id))).collect();
            for (m, oi) in day.iter().zip(&ois) {
                let mut deltas = Vec::new();
                for a in ds.match_appearances(&m.match_id) {
                    if a.position.grid().is_none() {
                        continue;
                    }
                    let prior = position_prior(a.position, &local, &global);
                    let hist = history.get(&a.player_id).copied().unwrap_or_default();
                    let expected = expected_oi(&a.player_id, &m.match_id, hist, prior, cfg.prior_threshold_minutes);
                    let actual = oi.get(&a.player_id).copied().unwrap_or(0.0);
                    deltas.push(OpponentDelta::new(&expected, a, actual, cfg.raw_actual));
                }
                out.insert(m.match_id.clone(), deltas);
            }
            for (m, oi) in day.iter().zip(&ois) {
                for a in ds.match_appearances(&m.match_id) {
                    let v = oi.get(&a.player_id).copied().unwrap_or(0.0);
                    history.entry(a.player_id.clone()).or_default().add(v, a.minutes());
                    local.add(a.position, v, a.minutes());
                }
            }
            i = j;
        }
    }
    out
}

/// One pair's numbers in one match.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatch {
    pub minutes: f64,
    pub joi: f64,
    pub interactions: u32,
    /// `None` unless both players were outfield players in this match.
    pub jdi: Option<f64>,
}

/// All teammate pairs with positive shared minutes in one match.
pub fn match_pair_metrics(
    ds: &Dataset,
    m: &MatchInfo,
    deltas: &[OpponentDelta],
    cfg: &JdiConfig,
) -> BTreeMap<(TeamId, PairKey), PairMatch> {
    let actions = ds.match_actions(&m.match_id);
    let apps = ds.match_appearances(&m.match_id);
    let joi = joi_by_pair(&extract_interactions(actions));
    let jdi = jdi_by_pair(apps, deltas, cfg.normalize_shares);
    let mut out = BTreeMap::new();
    for (i, p) in apps.iter().enumerate() {
        for q in &apps[i + 1..] {
            if p.team_id != q.team_id {
                continue;
            }
            let minutes = shared_minutes(apps, &[&p.player_id, &q.player_id]);
            if minutes <= 0.0 {
                continue;
            }
            let key = PairKey::of(&p.player_id, &q.player_id);
            let (joi_value, interactions) = joi.get(&key).copied().unwrap_or((0.0, 0));
            let both_outfield = p.position.grid().is_some() && q.position.grid().is_some();
            let jdi_value = both_outfield.then(|| jdi.get(&key).copied().unwrap_or(0.0));
            out.insert(
                (p.team_id.clone(), key),
                PairMatch {
                    minutes,
                    joi: joi_value,
                    interactions,
                    jdi: jdi_value,
                },
            );
        }
    }
    out
}

#[derive(Default)]
struct SeasonAccumulator {
    minutes: f64,
    joi: f64,
    jdi: Option<f64>,
    interactions: u32,
}

/// Computes [`PairSeasonMetrics`] for every teammate pair in every
/// competition-season, sorted by (competition, season, team, pair).
pub fn compute_pair_metrics(ds: &Dataset, cfg: &JdiConfig) -> Vec<PairSeasonMetrics> {
    let deltas = opponent_deltas(ds, cfg);
    let ordered = ds.matches_by_date();
    let per_match: Vec<BTreeMap<(TeamId, PairKey), PairMatch>> = ordered
        .par_iter()
        .map(|m| {
            let d = deltas.get(&m.match_id).map(Vec::as_slice).unwrap_or(&[]);
            match_pair_metrics(ds, m, d, cfg)
        })
        .collect();

    type Key = (CompetitionId, String, TeamId, PairKey);
    let mut acc: BTreeMap<Key, SeasonAccumulator> = BTreeMap::new();
    for (m, pairs) in ordered.iter().zip(per_match) {
        for ((team, pair), pm) in pairs {
            let e = acc
                .entry((m.competition_id.clone(), m.season_label.clone(), team, pair))
                .or_default();
            e.minutes += pm.minutes;
            e.joi += pm.joi;
            e.interactions += pm.interactions;
            if let Some(v) = pm.jdi {
                e.jdi = Some(e.jdi.unwrap_or(0.0) + v);
            }
        }
    }
    acc.into_iter()
        .filter_map(|((competition_id, season_label, team_id, pair), e)| {
            let joi90 = per90([(e.joi, e.minutes)])?;
            let jdi90 = e.jdi.and_then(|v| per90([(v, e.minutes)]));
            Some(PairSeasonMetrics {
                competition_id,
                season_label,
                team_id,
                player_a: pair.a,
                player_b: pair.b,
                minutes_together: e.minutes,
                interaction_count: e.interactions,
                joi: e.joi,
                joi90,
                jdi: e.jdi,
                jdi90,
            })
        })
        .collect()
}
