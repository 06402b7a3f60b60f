//! Season labels and the train/validation/test split.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// A season is either a cross-year cycle (`2017/2018`) or a calendar year (`2018`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Season {
    CrossYear { start: i32 },
    Calendar { year: i32 },
}

impl Season {
    /// The year in which the season ends; calendar-year competitions are
    /// grouped with the cross-year season ending in the same year.
    pub fn end_year(self) -> i32 {
        match self {
            Season::CrossYear { start } => start + 1,
            Season::Calendar { year } => year,
        }
    }

    pub fn is_calendar(self) -> bool {
        matches!(self, Season::Calendar { .. })
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Season::CrossYear { start } => write!(f, "{}/{}", start, start + 1),
            Season::Calendar { year } => write!(f, "{year}"),
        }
    }
}

impl FromStr for Season {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DataError::BadSeason(s.to_string());
        let parse_year = |t: &str| -> Result<i32, DataError> {
            if t.len() != 4 || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        match s.trim().split_once('/') {
            Some((a, b)) => {
                let start = parse_year(a)?;
                let end = parse_year(b)?;
                if end != start + 1 {
                    return Err(bad());
                }
                Ok(Season::CrossYear { start })
            }
            None => Ok(Season::Calendar {
                year: parse_year(s.trim())?,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// Split boundaries expressed as season end years (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBoundaries {
    pub train_last_end_year: i32,
    pub validation_last_end_year: i32,
}

impl Default for SplitBoundaries {
    /// Training up to 2016/2017, validation 2017/2018, test from 2018/2019 on.
    fn default() -> Self {
        Self {
            train_last_end_year: 2017,
            validation_last_end_year: 2018,
        }
    }
}

/// Assigns a season to a data split. The `calendar_cycle` flag from the
/// matches file must agree with the shape of the label.
pub fn assign_split(season_label: &str, calendar_cycle: bool, bounds: &SplitBoundaries) -> Result<Split, DataError> {
    let season: Season = season_label.parse()?;
    if season.is_calendar() != calendar_cycle {
        return Err(DataError::BadSeason(format!(
            "{season_label} (calendar_cycle={calendar_cycle} disagrees with label)"
        )));
    }
    Ok(split_for(season, bounds))
}

pub fn split_for(season: Season, bounds: &SplitBoundaries) -> Split {
    let end = season.end_year();
    if end <= bounds.train_last_end_year {
        Split::Train
    } else if end <= bounds.validation_last_end_year {
        Split::Validation
    } else {
        Split::Test
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let b = SplitBoundaries::default();
        assert_eq!(assign_split("2016/2017", false, &b).unwrap(), Split::Train);
        assert_eq!(assign_split("2015/2016", false, &b).unwrap(), Split::Train);
        assert_eq!(assign_split("2018", true, &b).unwrap(), Split::Validation);
        assert_eq!(assign_split("2017/2018", false, &b).unwrap(), Split::Validation);
        assert_eq!(assign_split("2019/2020", false, &b).unwrap(), Split::Test);
        assert_eq!(assign_split("2019", true, &b).unwrap(), Split::Test);
    }

    #[test]
    fn rejects_malformed_labels() {
        let b = SplitBoundaries::default();
        assert!(assign_split("2017/2019", false, &b).is_err());
        assert!(assign_split("17/18", false, &b).is_err());
        assert!(assign_split("autumn", true, &b).is_err());
        assert!(assign_split("2018", false, &b).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for l in ["2017/2018", "2019"] {
            assert_eq!(l.parse::<Season>().unwrap().label(), l);
        }
    }
}
