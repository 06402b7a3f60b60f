//! The 5-by-5 positional grid used to assign defensive responsibility.
//!
//! Row 0 is the forward line and row 4 the back line; column 0 is the left
//! flank and column 4 the right flank, both seen from the team's own
//! perspective. Goalkeepers have no cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A named outfield position with a fixed grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPosition {
    LeftWingForward,
    Striker,
    RightWingForward,
    LeftAttackingMidfielder,
    SecondStriker,
    AttackingMidfielder,
    RightAttackingMidfielder,
    LeftWinger,
    LeftCenterMidfielder,
    RightCenterMidfielder,
    RightWinger,
    LeftWingback,
    LeftDefensiveMidfielder,
    DefensiveMidfielder,
    RightDefensiveMidfielder,
    RightWingback,
    LeftBack,
    LeftCenterBack,
    CenterBack,
    RightCenterBack,
    RightBack,
}

/// A grid cell as `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: u8,
    pub col: u8,
}

impl Cell {
    pub const fn new(row: u8, col: u8) -> Self {
        Self { row, col }
    }

    /// The same cell seen from the opposing team's perspective.
    pub fn mirrored(self) -> Self {
        Self {
            row: 4 - self.row,
            col: 4 - self.col,
        }
    }

    pub fn distance(self, other: Cell) -> f64 {
        let dr = f64::from(self.row) - f64::from(other.row);
        let dc = f64::from(self.col) - f64::from(other.col);
        (dr * dr + dc * dc).sqrt()
    }
}

impl GridPosition {
    pub const ALL: [GridPosition; 21] = [
        GridPosition::LeftWingForward,
        GridPosition::Striker,
        GridPosition::RightWingForward,
        GridPosition::LeftAttackingMidfielder,
        GridPosition::SecondStriker,
        GridPosition::AttackingMidfielder,
        GridPosition::RightAttackingMidfielder,
        GridPosition::LeftWinger,
        GridPosition::LeftCenterMidfielder,
        GridPosition::RightCenterMidfielder,
        GridPosition::RightWinger,
        GridPosition::LeftWingback,
        GridPosition::LeftDefensiveMidfielder,
        GridPosition::DefensiveMidfielder,
        GridPosition::RightDefensiveMidfielder,
        GridPosition::RightWingback,
        GridPosition::LeftBack,
        GridPosition::LeftCenterBack,
        GridPosition::CenterBack,
        GridPosition::RightCenterBack,
        GridPosition::RightBack,
    ];

    pub fn cell(self) -> Cell {
        use GridPosition::*;
        let (row, col) = match self {
            LeftWingForward => (0, 0),
            Striker => (0, 2),
            RightWingForward => (0, 4),
            LeftAttackingMidfielder => (1, 1),
            SecondStriker | AttackingMidfielder => (1, 2),
            RightAttackingMidfielder => (1, 3),
            LeftWinger => (2, 0),
            LeftCenterMidfielder => (2, 1),
            RightCenterMidfielder => (2, 3),
            RightWinger => (2, 4),
            LeftWingback => (3, 0),
            LeftDefensiveMidfielder => (3, 1),
            DefensiveMidfielder => (3, 2),
            RightDefensiveMidfielder => (3, 3),
            RightWingback => (3, 4),
            LeftBack => (4, 0),
            LeftCenterBack => (4, 1),
            CenterBack => (4, 2),
            RightCenterBack => (4, 3),
            RightBack => (4, 4),
        };
        Cell::new(row, col)
    }

    /// Human-readable name as printed on team sheets.
    pub fn display_name(self) -> &'static str {
        use GridPosition::*;
        match self {
            LeftWingForward => "Left Wing Forward",
            Striker => "Striker",
            RightWingForward => "Right Wing Forward",
            LeftAttackingMidfielder => "Left Attacking Midfielder",
            SecondStriker => "Second Striker",
            AttackingMidfielder => "Attacking Midfielder",
            RightAttackingMidfielder => "Right Attacking Midfielder",
            LeftWinger => "Left Winger",
            LeftCenterMidfielder => "Left Center Midfielder",
            RightCenterMidfielder => "Right Center Midfielder",
            RightWinger => "Right Winger",
            LeftWingback => "Left Wingback",
            LeftDefensiveMidfielder => "Left Defensive Midfielder",
            DefensiveMidfielder => "Defensive Midfielder",
            RightDefensiveMidfielder => "Right Defensive Midfielder",
            RightWingback => "Right Wingback",
            LeftBack => "Left Back",
            LeftCenterBack => "Left Center Back",
            CenterBack => "Center Back",
            RightCenterBack => "Right Center Back",
            RightBack => "Right Back",
        }
    }

    /// Token used in data files, e.g. `right_back`.
    pub fn code(self) -> &'static str {
        use GridPosition::*;
        match self {
            LeftWingForward => "left_wing_forward",
            Striker => "striker",
            RightWingForward => "right_wing_forward",
            LeftAttackingMidfielder => "left_attacking_midfielder",
            SecondStriker => "second_striker",
            AttackingMidfielder => "attacking_midfielder",
            RightAttackingMidfielder => "right_attacking_midfielder",
            LeftWinger => "left_winger",
            LeftCenterMidfielder => "left_center_midfielder",
            RightCenterMidfielder => "right_center_midfielder",
            RightWinger => "right_winger",
            LeftWingback => "left_wingback",
            LeftDefensiveMidfielder => "left_defensive_midfielder",
            DefensiveMidfielder => "defensive_midfielder",
            RightDefensiveMidfielder => "right_defensive_midfielder",
            RightWingback => "right_wingback",
            LeftBack => "left_back",
            LeftCenterBack => "left_center_back",
            CenterBack => "center_back",
            RightCenterBack => "right_center_back",
            RightBack => "right_back",
        }
    }
}

/// Where a player lines up in one appearance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Goalkeeper,
    Grid(GridPosition),
}

impl Position {
    pub fn grid(self) -> Option<GridPosition> {
        match self {
            Position::Goalkeeper => None,
            Position::Grid(g) => Some(g),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Position::Goalkeeper => "goalkeeper",
            Position::Grid(g) => g.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPosition(pub String);

impl fmt::Display for UnknownPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown position `{}`", self.0)
    }
}

impl std::error::Error for UnknownPosition {}

fn normalize_token(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| {
            if c == ' ' || c == '-' {
                '_'
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

impl FromStr for Position {
    type Err = UnknownPosition;

    /// Accepts both file tokens (`right_back`) and display names (`Right Back`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let token = normalize_token(s);
        if token == "goalkeeper" {
            return Ok(Position::Goalkeeper);
        }
        GridPosition::ALL
            .iter()
            .find(|g| g.code() == token)
            .map(|g| Position::Grid(*g))
            .ok_or_else(|| UnknownPosition(s.to_string()))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Coarse position line used by the team builder and as a player feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionLine {
    Goalkeeper,
    Defender,
    Midfielder,
    Forward,
}

impl PositionLine {
    pub const ALL: [PositionLine; 4] = [
        PositionLine::Goalkeeper,
        PositionLine::Defender,
        PositionLine::Midfielder,
        PositionLine::Forward,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PositionLine::Goalkeeper => "goalkeeper",
            PositionLine::Defender => "defender",
            PositionLine::Midfielder => "midfielder",
            PositionLine::Forward => "forward",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for PositionLine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_token(s).as_str() {
            "goalkeeper" | "gk" => Ok(PositionLine::Goalkeeper),
            "defender" | "def" => Ok(PositionLine::Defender),
            "midfielder" | "mid" => Ok(PositionLine::Midfielder),
            "forward" | "fwd" | "striker" => Ok(PositionLine::Forward),
            _ => Err(format!("unknown position line `{s}`")),
        }
    }
}

impl fmt::Display for PositionLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn grid_has_twenty_distinct_cells() {
        let cells: BTreeSet<Cell> = GridPosition::ALL.iter().map(|g| g.cell()).collect();
        assert_eq!(cells.len(), 20);
        assert_eq!(
            GridPosition::SecondStriker.cell(),
            GridPosition::AttackingMidfielder.cell()
        );
        for g in GridPosition::ALL {
            let c = g.cell();
            assert!(c.row <= 4 && c.col <= 4);
        }
    }

    #[test]
    fn parses_codes_and_display_names() {
        for g in GridPosition::ALL {
            assert_eq!(g.code().parse::<Position>().unwrap(), Position::Grid(g));
            assert_eq!(g.display_name().parse::<Position>().unwrap(), Position::Grid(g));
        }
        assert_eq!("Goalkeeper".parse::<Position>().unwrap(), Position::Goalkeeper);
        assert!("sweeper".parse::<Position>().is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        for row in 0..5 {
            for col in 0..5 {
                let c = Cell::new(row, col);
                assert_eq!(c.mirrored().mirrored(), c);
            }
        }
    }
}
