//! Pair feature vectors built from player profiles.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::gbdt::{Column, FeatureValue};
use super::PredictError;
use crate::datamodel::{Dataset, PairKey, PlayerId, PlayerProfile, PositionLine, TeamId, PHYSICAL_COUNT, ROLE_COUNT};

pub const UNKNOWN: &str = "unknown";

const PHYSICAL_NAMES: [&str; PHYSICAL_COUNT] = ["phys_air", "phys_ground", "phys_speed", "phys_work"];
const NUMERIC_SLOTS: usize = 3 + PHYSICAL_COUNT + ROLE_COUNT;
const BLOCK_LEN: usize = 1 + NUMERIC_SLOTS + 4;

/// Feature columns in vector order: block `a` (lower player id), block `b`,
/// then pair flags and the shared-history count.
pub fn feature_columns() -> Vec<Column> {
    let mut cols = Vec::new();
    for side in ["a", "b"] {
        cols.push(Column::numeric(format!("{side}_age")));
        cols.push(Column::categorical(format!("{side}_position_line")));
        cols.push(Column::numeric(format!("{side}_height")));
        cols.push(Column::numeric(format!("{side}_weight")));
        for name in ["nationality", "region", "subregion", "mother_tongue"] {
            cols.push(Column::categorical(format!("{side}_{name}")));
        }
        for name in PHYSICAL_NAMES {
            cols.push(Column::numeric(format!("{side}_{name}")));
        }
        for i in 1..=ROLE_COUNT {
            cols.push(Column::numeric(format!("{side}_role_{i:02}")));
        }
    }
    for name in [
        "same_nationality",
        "same_mother_tongue",
        "same_region",
        "same_subregion",
        "matches_together_before_season",
    ] {
        cols.push(Column::numeric(name));
    }
    cols
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub pair: PairKey,
    pub values: Vec<FeatureValue>,
}

/// Context for one (pair, season) feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonContext {
    /// Ages are measured on this date.
    pub reference_date: NaiveDate,
    pub matches_together_before_season: u32,
}

/// Means used to fill missing numeric profile fields, per position line.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputer {
    /// Birth dates as days since the common era; height; weight; physical; roles.
    line_means: BTreeMap<PositionLine, Vec<f64>>,
    global_means: Vec<f64>,
}

fn numeric_slots(p: &PlayerProfile) -> Vec<Option<f64>> {
    let mut v = Vec::with_capacity(NUMERIC_SLOTS);
    v.push(p.birth_date.map(|d| chrono::Datelike::num_days_from_ce(&d) as f64));
    v.push(p.height_cm);
    v.push(p.weight_kg);
    v.extend(p.physical);
    v.extend(p.role_scores);
    v
}

fn means<'a>(profiles: impl Iterator<Item = &'a PlayerProfile>) -> Vec<Option<f64>> {
    let mut sums = vec![(0.0, 0usize); NUMERIC_SLOTS];
    for p in profiles {
        for (s, v) in sums.iter_mut().zip(numeric_slots(p)) {
            if let Some(x) = v {
                s.0 += x;
                s.1 += 1;
            }
        }
    }
    sums.into_iter().map(|(s, n)| (n > 0).then(|| s / n as f64)).collect()
}

impl Imputer {
    pub fn fit<'a>(profiles: impl IntoIterator<Item = &'a PlayerProfile> + Clone) -> Self {
        let global: Vec<f64> = means(profiles.clone().into_iter())
            .into_iter()
            .map(|m| m.unwrap_or(0.0))
            .collect();
        let mut line_means = BTreeMap::new();
        for line in PositionLine::ALL {
            let m = means(profiles.clone().into_iter().filter(|p| p.position_line == line));
            let filled = m.into_iter().zip(&global).map(|(m, g)| m.unwrap_or(*g)).collect();
            line_means.insert(line, filled);
        }
        Self {
            line_means,
            global_means: global,
        }
    }

    fn fill(&self, p: &PlayerProfile) -> Vec<f64> {
        let means = self.line_means.get(&p.position_line).unwrap_or(&self.global_means);
        numeric_slots(p)
            .into_iter()
            .zip(means)
            .map(|(v, m)| v.unwrap_or(*m))
            .collect()
    }
}

fn cat(v: &Option<String>) -> String {
    match v {
        Some(s) if !s.trim().is_empty() => s.clone(),
        _ => UNKNOWN.to_string(),
    }
}

/// Both values known and equal.
fn same(a: &Option<String>, b: &Option<String>) -> f64 {
    fn known(v: &Option<String>) -> Option<&str> {
        v.as_deref().filter(|s| !s.trim().is_empty())
    }
    match (known(a), known(b)) {
        (Some(x), Some(y)) if x == y => 1.0,
        _ => 0.0,
    }
}

fn block(p: &PlayerProfile, imputer: &Imputer, reference: NaiveDate) -> Vec<FeatureValue> {
    let nums = imputer.fill(p);
    let reference_days = chrono::Datelike::num_days_from_ce(&reference) as f64;
    let mut out = Vec::with_capacity(BLOCK_LEN);
    out.push(FeatureValue::Num((reference_days - nums[0]) / 365.25));
    out.push(FeatureValue::Cat(p.position_line.code().to_string()));
    out.push(FeatureValue::Num(nums[1]));
    out.push(FeatureValue::Num(nums[2]));
    for v in [&p.nationality, &p.region, &p.subregion, &p.mother_tongue] {
        out.push(FeatureValue::Cat(cat(v)));
    }
    out.extend(nums[3..].iter().map(|x| FeatureValue::Num(*x)));
    out
}

pub fn build_pair_features(
    profiles: &BTreeMap<PlayerId, PlayerProfile>,
    imputer: &Imputer,
    p: &PlayerId,
    q: &PlayerId,
    ctx: SeasonContext,
) -> Result<PairFeatures, PredictError> {
    let pair = PairKey::of(p, q);
    let get = |id: &PlayerId| profiles.get(id).ok_or_else(|| PredictError::MissingProfile(id.clone()));
    let (a, b) = (get(&pair.a)?, get(&pair.b)?);
    let mut values = block(a, imputer, ctx.reference_date);
    values.extend(block(b, imputer, ctx.reference_date));
    values.push(FeatureValue::Num(same(&a.nationality, &b.nationality)));
    values.push(FeatureValue::Num(same(&a.mother_tongue, &b.mother_tongue)));
    values.push(FeatureValue::Num(same(&a.region, &b.region)));
    values.push(FeatureValue::Num(same(&a.subregion, &b.subregion)));
    values.push(FeatureValue::Num(ctx.matches_together_before_season as f64));
    Ok(PairFeatures { pair, values })
}

/// Each player's appearances as (date, team), for shared-history counts.
#[derive(Debug, Clone, Default)]
pub struct LineupIndex {
    by_player: BTreeMap<PlayerId, BTreeMap<crate::datamodel::MatchId, (NaiveDate, TeamId)>>,
}

impl LineupIndex {
    pub fn new(ds: &Dataset) -> Self {
        let mut by_player: BTreeMap<_, BTreeMap<_, _>> = BTreeMap::new();
        for a in ds.appearances.values().flatten() {
            if let Some(m) = ds.matches.get(&a.match_id) {
                by_player
                    .entry(a.player_id.clone())
                    .or_default()
                    .insert(a.match_id.clone(), (m.date, a.team_id.clone()));
            }
        }
        Self { by_player }
    }

    /// Matches strictly before `before` in which both players appeared for
    /// the same team, club or country alike.
    pub fn matches_together_before(&self, p: &PlayerId, q: &PlayerId, before: NaiveDate) -> u32 {
        let (Some(mp), Some(mq)) = (self.by_player.get(p), self.by_player.get(q)) else {
            return 0;
        };
        let (small, large) = if mp.len() <= mq.len() { (mp, mq) } else { (mq, mp) };
        small
            .iter()
            .filter(|(id, (date, team))| *date < before && large.get(*id).is_some_and(|(_, t)| t == team))
            .count() as u32
    }
}
