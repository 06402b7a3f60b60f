//! Domain types shared by every stage of the pipeline, plus file ingestion.

mod grid;
mod io;
mod minutes;
mod season;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{Cell, GridPosition, Position, PositionLine, UnknownPosition};
pub use io::{
    parse_actions, parse_appearances, parse_matches, parse_pair_metrics, parse_players, write_actions,
    write_appearances, write_matches, write_pair_metrics, write_players, ACTIONS_HEADER, APPEARANCES_HEADER,
    MATCHES_HEADER, PAIR_METRICS_HEADER, PLAYERS_HEADER,
};
pub use minutes::{interval_overlap, shared_minutes};
pub use season::{assign_split, split_for, Season, Split, SplitBoundaries};

pub const PITCH_LENGTH: f64 = 105.0;
pub const PITCH_WIDTH: f64 = 68.0;
pub const ROLE_COUNT: usize = 22;
pub const PHYSICAL_COUNT: usize = 4;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: row {row}: {message}")]
    Schema { file: String, row: u64, message: String },
    #[error("{file}: {message}")]
    Header { file: String, message: String },
    #[error("malformed season label `{0}`")]
    BadSeason(String),
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(PlayerId);
id_type!(TeamId);
id_type!(MatchId);
id_type!(CompetitionId);

macro_rules! token_enum {
    ($name:ident { $($variant:ident => $code:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn code(self) -> &'static str {
                match self {
                    $($name::$variant => $code),+
                }
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($code => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($name), other)),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }
    };
}

token_enum!(ActionType {
    Pass => "pass",
    Cross => "cross",
    Dribble => "dribble",
    TakeOn => "take_on",
    Shot => "shot",
    Other => "other",
});

impl ActionType {
    /// The five action types that carry offensive value; everything else
    /// is kept in files but ignored by the metrics.
    pub fn is_offensive(self) -> bool {
        !matches!(self, ActionType::Other)
    }
}

token_enum!(ActionResult {
    Success => "success",
    Fail => "fail",
});

token_enum!(BodyPart {
    Foot => "foot",
    Head => "head",
    Other => "other",
});

token_enum!(PreferredFoot {
    Left => "left",
    Right => "right",
    Both => "both",
});

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchPoint {
    pub x: f64,
    pub y: f64,
}

impl PitchPoint {
    pub fn in_bounds(self) -> bool {
        (0.0..=PITCH_LENGTH).contains(&self.x) && (0.0..=PITCH_WIDTH).contains(&self.y)
    }
}

/// One on-the-ball event; `value` is the externally supplied action rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub match_id: MatchId,
    pub period: u8,
    pub seconds: f64,
    pub team_id: TeamId,
    pub player_id: PlayerId,
    pub action_type: ActionType,
    pub result: ActionResult,
    pub body_part: BodyPart,
    pub start: PitchPoint,
    pub end: PitchPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appearance {
    pub match_id: MatchId,
    pub player_id: PlayerId,
    pub team_id: TeamId,
    pub position: Position,
    pub minute_on: f64,
    pub minute_off: f64,
}

impl Appearance {
    pub fn minutes(&self) -> f64 {
        self.minute_off - self.minute_on
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub player_id: PlayerId,
    pub name: String,
    pub birth_date: Option<NaiveDate>,
    pub height_cm: Option<f64>,
    pub weight_kg: Option<f64>,
    pub nationality: Option<String>,
    pub mother_tongue: Option<String>,
    pub region: Option<String>,
    pub subregion: Option<String>,
    pub preferred_foot: Option<PreferredFoot>,
    pub position_line: PositionLine,
    /// Air duel, ground duel, speed and work rate on a 1-5 scale.
    pub physical: [Option<f64>; PHYSICAL_COUNT],
    pub role_scores: [Option<f64>; ROLE_COUNT],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchInfo {
    pub match_id: MatchId,
    pub competition_id: CompetitionId,
    pub season_label: String,
    pub calendar_cycle: bool,
    pub date: NaiveDate,
    pub home_team_id: TeamId,
    pub away_team_id: TeamId,
}

impl MatchInfo {
    pub fn season(&self) -> Season {
        // Validated at ingestion.
        self.season_label.parse().expect("season label validated at ingestion")
    }

    pub fn opponent_of(&self, team: &TeamId) -> Option<&TeamId> {
        if *team == self.home_team_id {
            Some(&self.away_team_id)
        } else if *team == self.away_team_id {
            Some(&self.home_team_id)
        } else {
            None
        }
    }
}

/// An unordered player pair, stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub a: PlayerId,
    pub b: PlayerId,
}

impl PairKey {
    pub fn new(p: PlayerId, q: PlayerId) -> Self {
        debug_assert_ne!(p, q, "a pair needs two distinct players");
        if p <= q {
            Self { a: p, b: q }
        } else {
            Self { a: q, b: p }
        }
    }

    pub fn of(p: &PlayerId, q: &PlayerId) -> Self {
        Self::new(p.clone(), q.clone())
    }

    pub fn contains(&self, p: &PlayerId) -> bool {
        self.a == *p || self.b == *p
    }

    pub fn other(&self, p: &PlayerId) -> Option<&PlayerId> {
        if self.a == *p {
            Some(&self.b)
        } else if self.b == *p {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Chemistry of one pair for one team in one competition-season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSeasonMetrics {
    pub competition_id: CompetitionId,
    pub season_label: String,
    pub team_id: TeamId,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub minutes_together: f64,
    pub interaction_count: u32,
    pub joi: f64,
    pub joi90: f64,
    /// `None` when the pair never shared the pitch as two outfield players.
    pub jdi: Option<f64>,
    pub jdi90: Option<f64>,
}

impl PairSeasonMetrics {
    pub fn pair(&self) -> PairKey {
        PairKey::of(&self.player_a, &self.player_b)
    }
}

/// A fully loaded and cross-validated dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub matches: BTreeMap<MatchId, MatchInfo>,
    pub actions: BTreeMap<MatchId, Vec<Action>>,
    pub appearances: BTreeMap<MatchId, Vec<Appearance>>,
    pub players: BTreeMap<PlayerId, PlayerProfile>,
}

pub const ACTIONS_FILE: &str = "actions.csv";
pub const APPEARANCES_FILE: &str = "appearances.csv";
pub const PLAYERS_FILE: &str = "players.csv";
pub const MATCHES_FILE: &str = "matches.csv";

fn open(path: &Path) -> Result<std::fs::File, DataError> {
    std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<std::fs::File, DataError> {
    std::fs::File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self, DataError> {
        let matches = parse_matches(open(&dir.join(MATCHES_FILE))?)?;
        let actions = parse_actions(open(&dir.join(ACTIONS_FILE))?)?;
        let appearances = parse_appearances(open(&dir.join(APPEARANCES_FILE))?)?;
        let players = parse_players(open(&dir.join(PLAYERS_FILE))?)?;
        let ds = Dataset {
            matches,
            actions,
            appearances,
            players,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn write(&self, dir: &Path) -> Result<(), DataError> {
        std::fs::create_dir_all(dir).map_err(|source| DataError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write_matches(create(&dir.join(MATCHES_FILE))?, self.matches.values())?;
        write_actions(create(&dir.join(ACTIONS_FILE))?, self.actions.values().flatten())?;
        write_appearances(
            create(&dir.join(APPEARANCES_FILE))?,
            self.appearances.values().flatten(),
        )?;
        write_players(create(&dir.join(PLAYERS_FILE))?, self.players.values())?;
        Ok(())
    }

    /// Cross-file consistency checks.
    pub fn validate(&self) -> Result<(), DataError> {
        for (id, m) in &self.matches {
            if m.home_team_id == m.away_team_id {
                return Err(DataError::Inconsistent(format!(
                    "match {id}: home and away team are both {}",
                    m.home_team_id
                )));
            }
        }
        for (id, actions) in &self.actions {
            let m = self
                .matches
                .get(id)
                .ok_or_else(|| DataError::Inconsistent(format!("actions reference unknown match {id}")))?;
            if let Some(a) = actions.iter().find(|a| m.opponent_of(&a.team_id).is_none()) {
                return Err(DataError::Inconsistent(format!(
                    "match {id}: action by team {} which is not playing",
                    a.team_id
                )));
            }
        }
        for (id, apps) in &self.appearances {
            let m = self
                .matches
                .get(id)
                .ok_or_else(|| DataError::Inconsistent(format!("appearances reference unknown match {id}")))?;
            let mut seen = BTreeSet::new();
            for a in apps {
                if m.opponent_of(&a.team_id).is_none() {
                    return Err(DataError::Inconsistent(format!(
                        "match {id}: appearance for team {} which is not playing",
                        a.team_id
                    )));
                }
                if !seen.insert(&a.player_id) {
                    return Err(DataError::Inconsistent(format!(
                        "match {id}: player {} appears twice",
                        a.player_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn match_actions(&self, id: &MatchId) -> &[Action] {
        self.actions.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn match_appearances(&self, id: &MatchId) -> &[Appearance] {
        self.appearances.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Match length in minutes, taken as the latest substitution-off minute
    /// so that stoppage time is included.
    pub fn match_length(&self, id: &MatchId) -> f64 {
        self.match_appearances(id)
            .iter()
            .map(|a| a.minute_off)
            .fold(0.0, f64::max)
    }

    /// All matches ordered by (date, match id).
    pub fn matches_by_date(&self) -> Vec<&MatchInfo> {
        let mut v: Vec<&MatchInfo> = self.matches.values().collect();
        v.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.match_id.cmp(&b.match_id)));
        v
    }

    /// Matches grouped by (competition, season label), each group ordered by date.
    pub fn competition_seasons(&self) -> BTreeMap<(CompetitionId, String), Vec<&MatchInfo>> {
        let mut out: BTreeMap<(CompetitionId, String), Vec<&MatchInfo>> = BTreeMap::new();
        for m in self.matches_by_date() {
            out.entry((m.competition_id.clone(), m.season_label.clone()))
                .or_default()
                .push(m);
        }
        out
    }

    /// Players who appeared for `team` in the given competition-season.
    pub fn squad(&self, team: &TeamId, competition: &CompetitionId, season: &str) -> Vec<PlayerId> {
        let mut out = BTreeSet::new();
        for m in self.matches.values() {
            if m.competition_id != *competition || m.season_label != season {
                continue;
            }
            for a in self.match_appearances(&m.match_id) {
                if a.team_id == *team {
                    out.insert(a.player_id.clone());
                }
            }
        }
        out.into_iter().collect()
    }
}
