//! Predicting JOI90 and JDI90 for pairs from player profiles.

pub mod features;
pub mod gbdt;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{
    assign_split, CompetitionId, DataError, Dataset, PairSeasonMetrics, PlayerId, Split, SplitBoundaries, TeamId,
};
pub use features::{build_pair_features, feature_columns, Imputer, LineupIndex, PairFeatures, SeasonContext};
pub use gbdt::{Column, ColumnKind, FeatureValue, GbdtError, GbdtModel, GbdtParams};

/// Minimum shared minutes for a (pair, season) to become a training example.
pub const TRAINING_MIN_MINUTES: f64 = 700.0;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("no profile for player {0}")]
    MissingProfile(PlayerId),
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
    #[error("no examples to evaluate")]
    EmptyExamples,
    #[error(transparent)]
    Model(#[from] GbdtError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("predictor dump: {0}")]
    Dump(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Joi90,
    Jdi90,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Joi90, Target::Jdi90];

    pub fn code(self) -> &'static str {
        match self {
            Target::Joi90 => "joi90",
            Target::Jdi90 => "jdi90",
        }
    }

    /// 500 trees of depth 7 for JOI90, 1000 of depth 5 for JDI90.
    pub fn default_params(self) -> GbdtParams {
        let (n_trees, max_depth) = match self {
            Target::Joi90 => (500, 7),
            Target::Jdi90 => (1000, 5),
        };
        GbdtParams {
            n_trees,
            max_depth,
            ..GbdtParams::default()
        }
    }

    pub fn label(self, m: &PairSeasonMetrics) -> Option<f64> {
        match self {
            Target::Joi90 => Some(m.joi90),
            Target::Jdi90 => m.jdi90,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joi90" | "joi" => Ok(Target::Joi90),
            "jdi90" | "jdi" => Ok(Target::Jdi90),
            _ => Err(format!("unknown metric `{s}` (expected joi90 or jdi90)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub competition_id: CompetitionId,
    pub season_label: String,
    pub team_id: TeamId,
    pub split: Split,
    pub features: PairFeatures,
    pub label: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSets {
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub test: Vec<Example>,
}

impl TrainingSets {
    pub fn split(&self, s: Split) -> &[Example] {
        match s {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}

/// Metric rows that qualify as examples, with their labels.
pub fn qualifying_rows(
    metrics: &[PairSeasonMetrics],
    target: Target,
    min_minutes: f64,
) -> Vec<(&PairSeasonMetrics, f64)> {
    metrics
        .iter()
        .filter(|m| m.minutes_together >= min_minutes)
        .filter_map(|m| target.label(m).map(|y| (m, y)))
        .collect()
}

/// What the feature builder needs to know about a dataset, computed once.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    pub players: BTreeMap<PlayerId, crate::datamodel::PlayerProfile>,
    pub imputer: Imputer,
    pub lineups: LineupIndex,
    /// First match date and calendar flag per competition-season.
    pub season_start: BTreeMap<(CompetitionId, String), (NaiveDate, bool)>,
    /// Reference date for seasons not in the dataset: the day after its last match.
    pub after_last_match: NaiveDate,
}

impl FeatureContext {
    pub fn new(ds: &Dataset) -> Self {
        let season_start = ds
            .competition_seasons()
            .into_iter()
            .filter_map(|(k, ms)| ms.first().map(|m| (k, (m.date, m.calendar_cycle))))
            .collect();
        let after_last_match = ds
            .matches
            .values()
            .map(|m| m.date)
            .max()
            .and_then(|d| d.succ_opt())
            .unwrap_or(NaiveDate::MAX);
        Self {
            players: ds.players.clone(),
            imputer: Imputer::fit(ds.players.values()),
            lineups: LineupIndex::new(ds),
            season_start,
            after_last_match,
        }
    }

    pub fn reference_date(&self, competition: &CompetitionId, season: &str) -> NaiveDate {
        self.season_start
            .get(&(competition.clone(), season.to_string()))
            .map_or(self.after_last_match, |s| s.0)
    }

    /// Features of a pair as of a given date.
    pub fn pair_features_at(
        &self,
        p: &PlayerId,
        q: &PlayerId,
        reference_date: NaiveDate,
    ) -> Result<PairFeatures, PredictError> {
        let ctx = SeasonContext {
            reference_date,
            matches_together_before_season: self.lineups.matches_together_before(p, q, reference_date),
        };
        build_pair_features(&self.players, &self.imputer, p, q, ctx)
    }

    /// Features of a pair as of the start of a competition-season. An unknown
    /// season is treated as starting after every match in the dataset.
    pub fn pair_features(
        &self,
        p: &PlayerId,
        q: &PlayerId,
        competition: &CompetitionId,
        season: &str,
    ) -> Result<PairFeatures, PredictError> {
        self.pair_features_at(p, q, self.reference_date(competition, season))
    }
}

/// One example per (pair, season) with at least `min_minutes` together,
/// assigned to a split by its season.
pub fn make_training_set(
    fc: &FeatureContext,
    metrics: &[PairSeasonMetrics],
    target: Target,
    min_minutes: f64,
    bounds: &SplitBoundaries,
) -> Result<TrainingSets, PredictError> {
    let mut sets = TrainingSets::default();
    for (m, label) in qualifying_rows(metrics, target, min_minutes) {
        let key = (m.competition_id.clone(), m.season_label.clone());
        let calendar = match fc.season_start.get(&key) {
            Some(s) => s.1,
            None => m.season_label.parse::<crate::datamodel::Season>()?.is_calendar(),
        };
        let split = assign_split(&m.season_label, calendar, bounds)?;
        let features = fc.pair_features(&m.player_a, &m.player_b, &m.competition_id, &m.season_label)?;
        let ex = Example {
            competition_id: m.competition_id.clone(),
            season_label: m.season_label.clone(),
            team_id: m.team_id.clone(),
            split,
            features,
            label,
        };
        match split {
            Split::Train => sets.train.push(ex),
            Split::Validation => sets.validation.push(ex),
            Split::Test => sets.test.push(ex),
        }
    }
    Ok(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPredictor {
    pub target: Target,
    pub model: GbdtModel,
    /// Training label mean, the baseline prediction.
    pub baseline: f64,
    pub validation_rmse: Option<f64>,
    pub test_rmse: Option<f64>,
    pub train_rmse: Vec<f64>,
}

pub fn train(sets: &TrainingSets, target: Target, params: &GbdtParams) -> Result<TrainedPredictor, PredictError> {
    if sets.train.is_empty() {
        return Err(PredictError::EmptySplit("train"));
    }
    let columns = feature_columns();
    let rows: Vec<Vec<FeatureValue>> = sets.train.iter().map(|e| e.features.values.clone()).collect();
    let labels: Vec<f64> = sets.train.iter().map(|e| e.label).collect();
    let fit = GbdtModel::fit(&columns, &rows, &labels, params)?;
    let baseline = mean(&labels);
    let mut predictor = TrainedPredictor {
        target,
        model: fit.model,
        baseline,
        validation_rmse: None,
        test_rmse: None,
        train_rmse: fit.train_rmse,
    };
    if !sets.validation.is_empty() {
        predictor.validation_rmse = Some(evaluate_rmse(&predictor, &sets.validation)?);
    }
    if !sets.test.is_empty() {
        predictor.test_rmse = Some(evaluate_rmse(&predictor, &sets.test)?);
    }
    Ok(predictor)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn predict_pair(predictor: &TrainedPredictor, features: &PairFeatures) -> Result<f64, PredictError> {
    Ok(predictor.model.predict(&features.values)?)
}

fn rmse(pairs: impl Iterator<Item = (f64, f64)>) -> Result<f64, PredictError> {
    let (sse, n) = pairs.fold((0.0, 0usize), |(s, n), (y, p)| (s + (y - p) * (y - p), n + 1));
    if n == 0 {
        return Err(PredictError::EmptyExamples);
    }
    Ok((sse / n as f64).sqrt())
}

pub fn evaluate_rmse(predictor: &TrainedPredictor, examples: &[Example]) -> Result<f64, PredictError> {
    let preds = examples
        .iter()
        .map(|e| predict_pair(predictor, &e.features).map(|p| (e.label, p)))
        .collect::<Result<Vec<_>, _>>()?;
    rmse(preds.into_iter())
}

pub fn baseline_rmse(examples: &[Example], mean: f64) -> Result<f64, PredictError> {
    rmse(examples.iter().map(|e| (e.label, mean)))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl TrainedPredictor {
    pub fn dump(&self) -> String {
        let history: Vec<String> = self.train_rmse.iter().map(f64::to_string).collect();
        format!(
            "predictor 1\ntarget {}\nbaseline {}\nvalidation_rmse {}\ntest_rmse {}\ntrain_rmse {}\n{}",
            self.target,
            self.baseline,
            opt(self.validation_rmse),
            opt(self.test_rmse),
            history.join(" "),
            self.model.dump()
        )
    }

    pub fn load(text: &str) -> Result<Self, PredictError> {
        let mut lines = text.lines();
        let mut field = |key: &str| -> Result<String, PredictError> {
            let line = lines
                .next()
                .ok_or_else(|| PredictError::Dump(format!("missing `{key}`")))?;
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            if k != key {
                return Err(PredictError::Dump(format!("expected `{key}`, found `{k}`")));
            }
            Ok(v.to_string())
        };
        let bad = |what: &str| PredictError::Dump(format!("bad {what}"));
        if field("predictor")? != "1" {
            return Err(bad("format version"));
        }
        let target: Target = field("target")?.parse().map_err(PredictError::Dump)?;
        let baseline: f64 = field("baseline")?.parse().map_err(|_| bad("baseline"))?;
        let parse_opt = |s: String, what: &str| -> Result<Option<f64>, PredictError> {
            if s == "-" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(what))
            }
        };
        let validation_rmse = parse_opt(field("validation_rmse")?, "validation_rmse")?;
        let test_rmse = parse_opt(field("test_rmse")?, "test_rmse")?;
        let train_rmse = field("train_rmse")?
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad("train_rmse")))
            .collect::<Result<Vec<f64>, _>>()?;
        let rest: Vec<&str> = lines.collect();
        let model = GbdtModel::load(&rest.join("\n"))?;
        if model.columns != feature_columns() {
            return Err(PredictError::Model(GbdtError::SchemaMismatch(
                "model was trained on a different feature schema".to_string(),
            )));
        }
        Ok(Self {
            target,
            model,
            baseline,
            validation_rmse,
            test_rmse,
            train_rmse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(minutes: f64, jdi90: Option<f64>) -> PairSeasonMetrics {
        PairSeasonMetrics {
            competition_id: "C".into(),
            season_label: "2016/2017".to_string(),
            team_id: "T".into(),
            player_a: "p".into(),
            player_b: "q".into(),
            minutes_together: minutes,
            interaction_count: 0,
            joi: 0.0,
            joi90: 0.1,
            jdi: jdi90,
            jdi90,
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        let rows = [
            metric(699.0, Some(0.1)),
            metric(700.0, Some(0.1)),
            metric(699.999, None),
        ];
        let q = qualifying_rows(&rows, Target::Joi90, TRAINING_MIN_MINUTES);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].0.minutes_together, 700.0);
    }

    #[test]
    fn jdi_target_skips_rows_without_jdi() {
        let rows = [metric(800.0, None), metric(800.0, Some(-0.2))];
        let q = qualifying_rows(&rows, Target::Jdi90, TRAINING_MIN_MINUTES);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].1, -0.2);
    }

    #[test]
    fn default_hyperparameters() {
        let j = Target::Joi90.default_params();
        assert_eq!((j.n_trees, j.max_depth, j.learning_rate), (500, 7, 0.05));
        let d = Target::Jdi90.default_params();
        assert_eq!((d.n_trees, d.max_depth, d.learning_rate), (1000, 5, 0.05));
    }

    #[test]
    fn rmse_identities() {
        let labels = [1.0, 2.0, 4.0, 5.0];
        let ex: Vec<Example> = labels
            .iter()
            .map(|y| Example {
                competition_id: "C".into(),
                season_label: "2016/2017".to_string(),
                team_id: "T".into(),
                split: Split::Train,
                features: PairFeatures {
                    pair: crate::datamodel::PairKey::of(&"p".into(), &"q".into()),
                    values: Vec::new(),
                },
                label: *y,
            })
            .collect();
        // Population standard deviation of the labels around their mean 3.
        assert_eq!(baseline_rmse(&ex, 3.0).unwrap(), 2.5f64.sqrt());
        assert!(matches!(baseline_rmse(&[], 0.0), Err(PredictError::EmptyExamples)));
    }

    #[test]
    fn target_parsing() {
        assert_eq!("JOI90".parse::<Target>().unwrap(), Target::Joi90);
        assert_eq!("jdi".parse::<Target>().unwrap(), Target::Jdi90);
        assert!("xyz".parse::<Target>().is_err());
    }
}
