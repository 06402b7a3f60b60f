//! Read-only query engine over a store, shared by the CLI and the HTTP API.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chemistry_core::datamodel::{CompetitionId, Dataset, PairKey, PairSeasonMetrics, PlayerId, PositionLine, TeamId};
use chemistry_core::predict::{predict_pair, FeatureContext, Target, TrainedPredictor};
use chemistry_core::teambuilder::{
    solve_exact, solve_heuristic, ChemistryMatrix, PairChemistry, SquadRestriction, TeamBuildProblem,
    TeamBuildSolution, TeamError,
};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::store::{Store, TOOL_VERSION};

pub const DEFAULT_MIN_MINUTES: f64 = 900.0;
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Every response body: the payload plus the manifest hash of the store
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub manifest: String,
    pub data: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub tool_version: String,
    pub dataset_sha256: String,
    pub metrics: bool,
    pub models: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSummary {
    pub player_id: PlayerId,
    pub name: String,
    pub position_line: PositionLine,
    pub teams: Vec<TeamId>,
}

fn default_metric() -> Target {
    Target::Joi90
}

fn default_min_minutes() -> f64 {
    DEFAULT_MIN_MINUTES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairQuery {
    #[serde(default)]
    pub team: Option<TeamId>,
    #[serde(default)]
    pub competition: Option<CompetitionId>,
    #[serde(default)]
    pub season: Option<String>,
    #[serde(default = "default_metric")]
    pub metric: Target,
    #[serde(default = "default_min_minutes")]
    pub min_minutes: f64,
    #[serde(default)]
    pub limit: Option<usize>,
}

impl Default for PairQuery {
    fn default() -> Self {
        Self {
            team: None,
            competition: None,
            season: None,
            metric: Target::Joi90,
            min_minutes: DEFAULT_MIN_MINUTES,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub rank: usize,
    pub competition_id: CompetitionId,
    pub season_label: String,
    pub team_id: TeamId,
    pub player_a: PlayerId,
    pub name_a: String,
    pub player_b: PlayerId,
    pub name_b: String,
    pub minutes_together: f64,
    pub interaction_count: u32,
    pub joi90: f64,
    pub jdi90: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    #[serde(default)]
    pub competition: Option<CompetitionId>,
    #[serde(default)]
    pub season: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub joi90: f64,
    pub jdi90: f64,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRequest {
    pub pool: Vec<PlayerId>,
    #[serde(default)]
    pub pinned: Vec<PlayerId>,
    #[serde(default)]
    pub excluded: Vec<PlayerId>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub exact: bool,
    /// Season whose measured chemistry is preferred over predictions.
    #[serde(default)]
    pub competition: Option<CompetitionId>,
    #[serde(default)]
    pub season: Option<String>,
    /// Minutes together needed before a measured value replaces a prediction.
    #[serde(default = "default_min_minutes")]
    pub min_minutes: f64,
    #[serde(default)]
    pub squad_restriction: Option<SquadRestriction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamResult {
    #[serde(flatten)]
    pub solution: TeamBuildSolution,
    pub lines: BTreeMap<PlayerId, PositionLine>,
    pub measured_pairs: usize,
    pub predicted_pairs: usize,
}

pub struct Engine {
    store: Store,
    manifest_hash: String,
    dataset: Dataset,
    metrics: Vec<PairSeasonMetrics>,
    predictors: BTreeMap<Target, TrainedPredictor>,
    features: FeatureContext,
    teams_of: BTreeMap<PlayerId, BTreeSet<TeamId>>,
}

/// Measured values for a pool's season, falling back to model predictions.
struct Source<'a> {
    engine: &'a Engine,
    measured: BTreeMap<PairKey, (f64, Option<f64>)>,
    competition: Option<&'a CompetitionId>,
    season: Option<&'a str>,
    used: std::cell::Cell<(usize, usize)>,
}

impl PairChemistry for Source<'_> {
    fn joi_jdi(&self, p: &PlayerId, q: &PlayerId) -> std::result::Result<(f64, f64), TeamError> {
        let key = PairKey::of(p, q);
        let (m, n) = self.used.get();
        if let Some(&(joi, Some(jdi))) = self.measured.get(&key) {
            self.used.set((m + 1, n));
            return Ok((joi, jdi));
        }
        let predicted = self
            .engine
            .predict_values(p, q, self.competition, self.season)
            .map_err(|_| TeamError::UnresolvablePair(p.clone(), q.clone()))?;
        self.used.set((m, n + 1));
        match self.measured.get(&key) {
            Some(&(joi, None)) => Ok((joi, predicted.1)),
            _ => Ok(predicted),
        }
    }
}

impl Engine {
    pub fn open(root: &Path) -> Result<Self> {
        let store = Store::open(root)?;
        let dataset = store.dataset()?;
        let metrics = store.read_metrics()?;
        let mut predictors = BTreeMap::new();
        for t in Target::ALL {
            if let Some(p) = store.read_model(t)? {
                predictors.insert(t, p);
            }
        }
        let features = FeatureContext::new(&dataset);
        let mut teams_of: BTreeMap<PlayerId, BTreeSet<TeamId>> = BTreeMap::new();
        for a in dataset.appearances.values().flatten() {
            teams_of
                .entry(a.player_id.clone())
                .or_default()
                .insert(a.team_id.clone());
        }
        Ok(Self {
            manifest_hash: store.manifest.hash(),
            store,
            dataset,
            metrics,
            predictors,
            features,
            teams_of,
        })
    }

    pub fn manifest_hash(&self) -> &str {
        &self.manifest_hash
    }

    pub fn wrap<T>(&self, data: T) -> Envelope<T> {
        Envelope {
            manifest: self.manifest_hash.clone(),
            data,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn metrics(&self) -> &[PairSeasonMetrics] {
        &self.metrics
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".to_string(),
            tool_version: TOOL_VERSION.to_string(),
            dataset_sha256: self.store.manifest.dataset_sha256.clone(),
            metrics: self.store.has_metrics(),
            models: self.predictors.keys().copied().collect(),
        }
    }

    pub fn players(&self) -> Vec<PlayerSummary> {
        self.dataset
            .players
            .values()
            .map(|p| PlayerSummary {
                player_id: p.player_id.clone(),
                name: p.name.clone(),
                position_line: p.position_line,
                teams: self
                    .teams_of
                    .get(&p.player_id)
                    .map(|t| t.iter().cloned().collect())
                    .unwrap_or_default(),
            })
            .collect()
    }

    fn name(&self, p: &PlayerId) -> String {
        self.dataset.players.get(p).map(|x| x.name.clone()).unwrap_or_default()
    }

    pub fn require_metrics(&self) -> Result<()> {
        if self.store.has_metrics() {
            Ok(())
        } else {
            Err(ServiceError::NotFound(
                "no metrics in the store (run `chemistry compute-metrics`)".to_string(),
            ))
        }
    }

    /// Pairs meeting the filters, best first by the chosen metric. Pairs
    /// without a value for the metric are left out.
    pub fn pairs(&self, q: &PairQuery) -> Result<Vec<PairRow>> {
        self.require_metrics()?;
        if !q.min_minutes.is_finite() || q.min_minutes < 0.0 {
            return Err(ServiceError::User(format!("invalid min_minutes {}", q.min_minutes)));
        }
        if let Some(t) = &q.team {
            if !self.teams_of.values().any(|ts| ts.contains(t)) {
                return Err(ServiceError::NotFound(format!("unknown team {t}")));
            }
        }
        let mut rows: Vec<(&PairSeasonMetrics, f64)> = self
            .metrics
            .iter()
            .filter(|m| q.team.as_ref().is_none_or(|t| m.team_id == *t))
            .filter(|m| q.competition.as_ref().is_none_or(|c| m.competition_id == *c))
            .filter(|m| q.season.as_ref().is_none_or(|s| m.season_label == *s))
            .filter(|m| m.minutes_together >= q.min_minutes)
            .filter_map(|m| q.metric.label(m).map(|v| (m, v)))
            .collect();
        rows.sort_by(|(a, va), (b, vb)| {
            vb.total_cmp(va)
                .then_with(|| a.competition_id.cmp(&b.competition_id))
                .then_with(|| a.season_label.cmp(&b.season_label))
                .then_with(|| a.team_id.cmp(&b.team_id))
                .then_with(|| a.player_a.cmp(&b.player_a))
                .then_with(|| a.player_b.cmp(&b.player_b))
        });
        let limit = q.limit.unwrap_or(usize::MAX);
        Ok(rows
            .into_iter()
            .take(limit)
            .enumerate()
            .map(|(i, (m, _))| PairRow {
                rank: i + 1,
                competition_id: m.competition_id.clone(),
                season_label: m.season_label.clone(),
                team_id: m.team_id.clone(),
                player_a: m.player_a.clone(),
                name_a: self.name(&m.player_a),
                player_b: m.player_b.clone(),
                name_b: self.name(&m.player_b),
                minutes_together: m.minutes_together,
                interaction_count: m.interaction_count,
                joi90: m.joi90,
                jdi90: m.jdi90,
            })
            .collect())
    }

    fn predictor(&self, t: Target) -> Result<&TrainedPredictor> {
        self.predictors
            .get(&t)
            .ok_or_else(|| ServiceError::NotFound(format!("no trained {t} model (run `chemistry train`)")))
    }

    fn check_player(&self, p: &PlayerId) -> Result<()> {
        if self.dataset.players.contains_key(p) {
            Ok(())
        } else {
            Err(ServiceError::NotFound(format!("unknown player {p}")))
        }
    }

    fn predict_values(
        &self,
        p: &PlayerId,
        q: &PlayerId,
        competition: Option<&CompetitionId>,
        season: Option<&str>,
    ) -> Result<(f64, f64)> {
        let date = match (competition, season) {
            (Some(c), Some(s)) => self.features.reference_date(c, s),
            _ => self.features.after_last_match,
        };
        let features = self.features.pair_features_at(p, q, date)?;
        let joi = predict_pair(self.predictor(Target::Joi90)?, &features)?;
        let jdi = predict_pair(self.predictor(Target::Jdi90)?, &features)?;
        Ok((joi, jdi))
    }

    /// Predicted JOI90 and JDI90 for a pair as of a season's start (or after
    /// the last match in the dataset when no season is given).
    pub fn predict(&self, r: &PredictRequest) -> Result<Prediction> {
        self.check_player(&r.player_a)?;
        self.check_player(&r.player_b)?;
        if r.player_a == r.player_b {
            return Err(ServiceError::User("a pair needs two different players".to_string()));
        }
        if r.competition.is_some() != r.season.is_some() {
            return Err(ServiceError::User("competition and season go together".to_string()));
        }
        let key = PairKey::of(&r.player_a, &r.player_b);
        let (joi90, jdi90) = self.predict_values(&key.a, &key.b, r.competition.as_ref(), r.season.as_deref())?;
        Ok(Prediction {
            player_a: key.a,
            player_b: key.b,
            joi90,
            jdi90,
        })
    }

    /// Players who appeared for a team in a competition-season.
    pub fn squad(&self, team: &TeamId, competition: &CompetitionId, season: &str) -> Result<Vec<PlayerId>> {
        let squad = self.dataset.squad(team, competition, season);
        if squad.is_empty() {
            return Err(ServiceError::NotFound(format!(
                "no appearances for team {team} in {competition} {season}"
            )));
        }
        Ok(squad)
    }

    pub fn build_team(&self, r: &TeamRequest) -> Result<TeamResult> {
        if !(0.0..=1.0).contains(&r.alpha) {
            return Err(ServiceError::User(format!("alpha {} is outside [0, 1]", r.alpha)));
        }
        if r.competition.is_some() != r.season.is_some() {
            return Err(ServiceError::User("competition and season go together".to_string()));
        }
        let pool: BTreeSet<&PlayerId> = r.pool.iter().collect();
        if pool.len() != r.pool.len() {
            return Err(ServiceError::User("pool lists a player twice".to_string()));
        }
        for p in r.pool.iter().chain(&r.pinned).chain(&r.excluded) {
            self.check_player(p)?;
        }
        for p in r.pinned.iter().chain(&r.excluded) {
            if !pool.contains(p) {
                return Err(ServiceError::User(format!(
                    "{p} is pinned or excluded but not in the pool"
                )));
            }
        }
        let mut measured = BTreeMap::new();
        if let (Some(c), Some(s)) = (&r.competition, &r.season) {
            let mut best: BTreeMap<PairKey, &PairSeasonMetrics> = BTreeMap::new();
            for m in &self.metrics {
                if m.competition_id != *c || m.season_label != *s || m.minutes_together < r.min_minutes {
                    continue;
                }
                let key = m.pair();
                if !pool.contains(&key.a) || !pool.contains(&key.b) {
                    continue;
                }
                // A pair seen at two clubs in one season keeps its longer spell.
                let keep = best.get(&key).is_none_or(|b| m.minutes_together > b.minutes_together);
                if keep {
                    best.insert(key, m);
                }
            }
            measured = best.into_iter().map(|(k, m)| (k, (m.joi90, m.jdi90))).collect();
        }
        let source = Source {
            engine: self,
            measured,
            competition: r.competition.as_ref(),
            season: r.season.as_deref(),
            used: std::cell::Cell::new((0, 0)),
        };
        let matrix = ChemistryMatrix::build(&r.pool, &source, r.alpha, r.standardize)?;
        let lines: Vec<PositionLine> = matrix
            .players
            .iter()
            .map(|p| self.dataset.players[p].position_line)
            .collect();
        let mut problem = TeamBuildProblem::new(matrix, lines);
        problem.pinned = r.pinned.iter().cloned().collect();
        problem.excluded = r.excluded.iter().cloned().collect();
        problem.squad_restriction = r.squad_restriction.clone();
        let solution = if r.exact {
            solve_exact(&problem)?
        } else {
            solve_heuristic(&problem)?
        };
        let (measured_pairs, predicted_pairs) = source.used.get();
        let lines = solution
            .selected
            .iter()
            .map(|p| (p.clone(), self.dataset.players[p].position_line))
            .collect();
        Ok(TeamResult {
            solution,
            lines,
            measured_pairs,
            predicted_pairs,
        })
    }
}
