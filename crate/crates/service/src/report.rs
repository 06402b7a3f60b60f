//! Season reports: top-k chemistry trends and link-graph edge lists.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chemistry_core::datamodel::{PairSeasonMetrics, PlayerId};
use chemistry_core::predict::Target;
use serde::{Deserialize, Serialize};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_DISPLAY_MINUTES: f64 = 450.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    League,
    Team,
    Player,
}

impl EntityKind {
    pub fn code(self) -> &'static str {
        match self {
            EntityKind::League => "league",
            EntityKind::Team => "team",
            EntityKind::Player => "player",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub entity_kind: EntityKind,
    pub entity_id: String,
    pub competition_id: String,
    pub season_label: String,
    pub metric: Target,
    /// Pairs that passed the minutes filter; at most `k` of them are averaged.
    pub pairs_available: usize,
    pub pairs_used: usize,
    pub top_k_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub competition_id: String,
    pub season_label: String,
    pub team_id: String,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub minutes_together: f64,
    pub joi90: f64,
    pub jdi90: Option<f64>,
}

/// Mean of the `k` largest values; `None` when there are none. Fewer than
/// `k` values are averaged as they are.
pub fn top_k_average(values: &[f64], k: usize) -> Option<f64> {
    if values.is_empty() || k == 0 {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v.truncate(k);
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

/// Average chemistry of the k best pairs per league, team and player, for
/// each competition-season.
pub fn trends(metrics: &[PairSeasonMetrics], metric: Target, k: usize, min_minutes: f64) -> Vec<TrendRow> {
    type Key = (EntityKind, String, String, String);
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for m in metrics {
        if m.minutes_together < min_minutes {
            continue;
        }
        let Some(v) = metric.label(m) else { continue };
        let cs = (m.competition_id.to_string(), m.season_label.clone());
        let entities = [
            (EntityKind::League, m.competition_id.to_string()),
            (EntityKind::Team, m.team_id.to_string()),
            (EntityKind::Player, m.player_a.to_string()),
            (EntityKind::Player, m.player_b.to_string()),
        ];
        for (kind, id) in entities {
            groups
                .entry((kind, id, cs.0.clone(), cs.1.clone()))
                .or_default()
                .push(v);
        }
    }
    groups
        .into_iter()
        .filter_map(|((kind, id, comp, season), values)| {
            let avg = top_k_average(&values, k)?;
            Some(TrendRow {
                entity_kind: kind,
                entity_id: id,
                competition_id: comp,
                season_label: season,
                metric,
                pairs_available: values.len(),
                pairs_used: values.len().min(k),
                top_k_average: avg,
            })
        })
        .collect()
}

/// Links worth drawing: pairs that spent at least `display_minutes` together.
pub fn edges(metrics: &[PairSeasonMetrics], display_minutes: f64) -> Vec<EdgeRow> {
    let mut out: Vec<EdgeRow> = metrics
        .iter()
        .filter(|m| m.minutes_together >= display_minutes)
        .map(|m| EdgeRow {
            competition_id: m.competition_id.to_string(),
            season_label: m.season_label.clone(),
            team_id: m.team_id.to_string(),
            player_a: m.player_a.clone(),
            player_b: m.player_b.clone(),
            minutes_together: m.minutes_together,
            joi90: m.joi90,
            jdi90: m.jdi90,
        })
        .collect();
    out.sort_by(|a, b| {
        (&a.competition_id, &a.season_label, &a.team_id, &a.player_a, &a.player_b).cmp(&(
            &b.competition_id,
            &b.season_label,
            &b.team_id,
            &b.player_a,
            &b.player_b,
        ))
    });
    out
}

pub fn trends_csv(rows: &[TrendRow]) -> String {
    let mut s = String::from(
        "entity_kind,entity_id,competition_id,season_label,metric,pairs_available,pairs_used,top_k_average\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.entity_kind.code(),
            r.entity_id,
            r.competition_id,
            r.season_label,
            r.metric,
            r.pairs_available,
            r.pairs_used,
            r.top_k_average
        );
    }
    s
}

pub fn edges_csv(rows: &[EdgeRow]) -> String {
    let mut s = String::from("competition_id,season_label,team_id,player_a,player_b,minutes_together,joi90,jdi90\n");
    for r in rows {
        let jdi = r.jdi90.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.competition_id, r.season_label, r.team_id, r.player_a, r.player_b, r.minutes_together, r.joi90, jdi
        );
    }
    s
}
