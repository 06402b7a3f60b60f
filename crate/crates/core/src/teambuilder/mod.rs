//! Choosing the eleven players with the highest total pairwise chemistry.

mod exact;
mod heuristic;
mod matrix;
pub mod oracle;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{PlayerId, PositionLine};
pub use exact::solve_exact;
pub use heuristic::solve_heuristic;
pub use matrix::{ChemistryMatrix, PairChemistry};
pub use oracle::brute_force_oracle;

pub const TEAM_SIZE: usize = 11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeamError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("pool of {size} players exceeds the limit of {max}")]
    PoolTooLarge { size: usize, max: usize },
    #[error("no chemistry available for {0} and {1}")]
    UnresolvablePair(PlayerId, PlayerId),
}

/// Inclusive (min, max) number of players per line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormationBounds {
    pub goalkeeper: (usize, usize),
    pub defender: (usize, usize),
    pub midfielder: (usize, usize),
    pub forward: (usize, usize),
}

impl Default for FormationBounds {
    fn default() -> Self {
        Self {
            goalkeeper: (1, 1),
            defender: (3, 5),
            midfielder: (3, 5),
            forward: (1, 3),
        }
    }
}

impl FormationBounds {
    pub fn get(&self, line: PositionLine) -> (usize, usize) {
        match line {
            PositionLine::Goalkeeper => self.goalkeeper,
            PositionLine::Defender => self.defender,
            PositionLine::Midfielder => self.midfielder,
            PositionLine::Forward => self.forward,
        }
    }
}

/// "Exactly `count` of the eleven come from `players`."
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadRestriction {
    pub players: BTreeSet<PlayerId>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamBuildProblem {
    pub matrix: ChemistryMatrix,
    /// Aligned with `matrix.players`.
    pub lines: Vec<PositionLine>,
    #[serde(default)]
    pub pinned: BTreeSet<PlayerId>,
    #[serde(default)]
    pub excluded: BTreeSet<PlayerId>,
    #[serde(default)]
    pub squad_restriction: Option<SquadRestriction>,
    #[serde(default)]
    pub bounds: FormationBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamBuildSolution {
    /// Sorted by player id.
    pub selected: Vec<PlayerId>,
    pub objective: f64,
    pub status: SolveStatus,
    pub bound_gap: f64,
    pub node_count: u64,
}

/// Sum of `values[a][b]` over unordered pairs of `team`, visited in
/// ascending (a, b) order. Every solver reports objectives this way so that
/// ties compare exactly.
pub fn team_objective(values: &[Vec<f64>], team: &[usize]) -> f64 {
    let mut sorted = team.to_vec();
    sorted.sort_unstable();
    let mut total = 0.0;
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            total += values[a][b];
        }
    }
    total
}

/// Per-line counts for the feasibility test, with the pool split by
/// membership of the squad restriction ("in") or not ("out").
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct LineCounts {
    pub pin_in: usize,
    pub pin_out: usize,
    /// Available players, pinned ones included.
    pub avail_in: usize,
    pub avail_out: usize,
}

/// Index-level view of a problem shared by the solvers.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub n: usize,
    pub line: Vec<usize>,
    pub in_set: Vec<bool>,
    pub pinned: Vec<usize>,
    pub candidates: Vec<usize>,
    pub is_pinned: Vec<bool>,
    pub restriction: Option<usize>,
    pub bounds: [(usize, usize); 4],
}

impl Prepared {
    /// Counts with `chosen` forced in and `chosen ∪ open` available.
    pub fn counts(&self, chosen: &[usize], open: &[usize]) -> [LineCounts; 4] {
        let mut c = [LineCounts::default(); 4];
        for &i in chosen {
            let e = &mut c[self.line[i]];
            if self.in_set[i] {
                e.pin_in += 1;
                e.avail_in += 1;
            } else {
                e.pin_out += 1;
                e.avail_out += 1;
            }
        }
        for &i in open {
            let e = &mut c[self.line[i]];
            if self.in_set[i] {
                e.avail_in += 1;
            } else {
                e.avail_out += 1;
            }
        }
        c
    }

    pub fn feasible(&self, counts: &[LineCounts; 4]) -> bool {
        feasible(counts, &self.bounds, self.restriction)
    }

    /// Does a full team satisfy every constraint?
    pub fn valid_team(&self, team: &[usize]) -> bool {
        team.len() == TEAM_SIZE && self.feasible(&self.counts(team, &[]))
    }
}

/// Whether some eleven exists with every line inside its bounds, every
/// pinned player included, and (when restricted) exactly `restriction`
/// players from the "in" side.
pub(crate) fn feasible(counts: &[LineCounts; 4], bounds: &[(usize, usize); 4], restriction: Option<usize>) -> bool {
    let range = |l: usize| {
        let c = counts[l];
        let lo = bounds[l].0.max(c.pin_in + c.pin_out);
        let hi = bounds[l].1.min(c.avail_in + c.avail_out);
        lo..=hi
    };
    for g in range(0) {
        for d in range(1) {
            for m in range(2) {
                let used = g + d + m;
                if used >= TEAM_SIZE {
                    continue;
                }
                let f = TEAM_SIZE - used;
                if !range(3).contains(&f) {
                    continue;
                }
                let totals = [g, d, m, f];
                let (mut lo_sum, mut hi_sum, mut ok) = (0, 0, true);
                for (l, &t) in totals.iter().enumerate() {
                    let c = counts[l];
                    if t < c.pin_out {
                        ok = false;
                        break;
                    }
                    let lo = c.pin_in.max(t.saturating_sub(c.avail_out));
                    let hi = c.avail_in.min(t - c.pin_out);
                    if lo > hi {
                        ok = false;
                        break;
                    }
                    lo_sum += lo;
                    hi_sum += hi;
                }
                if ok && restriction.is_none_or(|k| lo_sum <= k && k <= hi_sum) {
                    return true;
                }
            }
        }
    }
    false
}

impl TeamBuildProblem {
    pub fn new(matrix: ChemistryMatrix, lines: Vec<PositionLine>) -> Self {
        Self {
            matrix,
            lines,
            pinned: BTreeSet::new(),
            excluded: BTreeSet::new(),
            squad_restriction: None,
            bounds: FormationBounds::default(),
        }
    }

    fn index(&self, p: &PlayerId, what: &str) -> Result<usize, TeamError> {
        self.matrix
            .index_of(p)
            .ok_or_else(|| TeamError::InvalidProblem(format!("{what} player {p} is not in the pool")))
    }

    pub(crate) fn prepare(&self) -> Result<Prepared, TeamError> {
        let n = self.matrix.len();
        if self.lines.len() != n {
            return Err(TeamError::InvalidProblem(format!(
                "{} position lines for a pool of {n}",
                self.lines.len()
            )));
        }
        if self.matrix.values.len() != n || self.matrix.values.iter().any(|r| r.len() != n) {
            return Err(TeamError::InvalidProblem("matrix does not match the pool".to_string()));
        }
        if self.matrix.players.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TeamError::InvalidProblem(
                "pool must be sorted by player id without duplicates".to_string(),
            ));
        }
        for row in &self.matrix.values {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(TeamError::InvalidProblem("matrix has non-finite entries".to_string()));
            }
        }
        if let Some(p) = self.pinned.intersection(&self.excluded).next() {
            return Err(TeamError::InvalidProblem(format!(
                "player {p} is both pinned and excluded"
            )));
        }
        let mut is_pinned = vec![false; n];
        let mut is_excluded = vec![false; n];
        for p in &self.pinned {
            is_pinned[self.index(p, "pinned")?] = true;
        }
        for p in &self.excluded {
            is_excluded[self.index(p, "excluded")?] = true;
        }
        let mut in_set = vec![true; n];
        if let Some(r) = &self.squad_restriction {
            in_set = vec![false; n];
            for p in &r.players {
                if let Some(i) = self.matrix.index_of(p) {
                    in_set[i] = true;
                }
            }
        }
        let b = &self.bounds;
        Ok(Prepared {
            n,
            line: self.lines.iter().map(|l| l.index()).collect(),
            in_set,
            pinned: (0..n).filter(|&i| is_pinned[i]).collect(),
            candidates: (0..n).filter(|&i| !is_pinned[i] && !is_excluded[i]).collect(),
            is_pinned,
            restriction: self.squad_restriction.as_ref().map(|r| r.count),
            bounds: [b.goalkeeper, b.defender, b.midfielder, b.forward],
        })
    }

    /// Validates the problem and explains the first violated constraint.
    pub(crate) fn check(&self) -> Result<Prepared, TeamError> {
        let prep = self.prepare()?;
        if prep.pinned.len() > TEAM_SIZE {
            return Err(TeamError::Infeasible(format!(
                "{} players pinned but a team has {TEAM_SIZE}",
                prep.pinned.len()
            )));
        }
        let counts = prep.counts(&prep.pinned, &prep.candidates);
        for line in PositionLine::ALL {
            let (lo, hi) = prep.bounds[line.index()];
            let c = counts[line.index()];
            let pinned = c.pin_in + c.pin_out;
            let avail = c.avail_in + c.avail_out;
            if pinned > hi {
                return Err(TeamError::Infeasible(format!(
                    "{line} bound violated: {pinned} pinned, at most {hi} allowed"
                )));
            }
            if avail < lo {
                return Err(TeamError::Infeasible(format!(
                    "{line} bound violated: at least {lo} required, only {avail} available"
                )));
            }
        }
        let max_fill: usize = (0..4)
            .map(|l| prep.bounds[l].1.min(counts[l].avail_in + counts[l].avail_out))
            .sum();
        if max_fill < TEAM_SIZE {
            return Err(TeamError::Infeasible(format!(
                "line maxima and availability allow only {max_fill} of {TEAM_SIZE} players"
            )));
        }
        let min_fill: usize = (0..4)
            .map(|l| prep.bounds[l].0.max(counts[l].pin_in + counts[l].pin_out))
            .sum();
        if min_fill > TEAM_SIZE {
            return Err(TeamError::Infeasible(format!(
                "line minima and pins require {min_fill} players, more than {TEAM_SIZE}"
            )));
        }
        if let Some(k) = prep.restriction {
            let sum = |f: fn(&LineCounts) -> usize| counts.iter().map(f).sum::<usize>();
            let (pin_in, avail_in) = (sum(|c| c.pin_in), sum(|c| c.avail_in));
            let (pin_out, avail_out) = (sum(|c| c.pin_out), sum(|c| c.avail_out));
            let out = TEAM_SIZE.saturating_sub(k);
            let reason = if k > TEAM_SIZE {
                Some(format!("squad restriction asks for {k} players"))
            } else if avail_in < k {
                Some(format!(
                    "squad restriction needs {k} players, only {avail_in} available"
                ))
            } else if pin_in > k {
                Some(format!("{pin_in} pinned squad players exceed the restriction of {k}"))
            } else if avail_out < out {
                Some(format!(
                    "{out} players needed from outside the squad, only {avail_out} available"
                ))
            } else if pin_out > out {
                Some(format!("{pin_out} pinned outside players exceed the {out} allowed"))
            } else {
                None
            };
            if let Some(r) = reason {
                return Err(TeamError::Infeasible(r));
            }
        }
        if !prep.feasible(&counts) {
            return Err(TeamError::Infeasible(
                "no split of eleven across the line bounds satisfies the pins and squad restriction".to_string(),
            ));
        }
        Ok(prep)
    }

    /// Constraint violations of a proposed team, empty when it is valid.
    pub fn violations(&self, team: &[PlayerId]) -> Vec<String> {
        let mut out = Vec::new();
        let set: BTreeSet<&PlayerId> = team.iter().collect();
        if team.len() != TEAM_SIZE || set.len() != TEAM_SIZE {
            out.push(format!("{} distinct players instead of {TEAM_SIZE}", set.len()));
        }
        let mut per_line = [0usize; 4];
        for p in &set {
            match self.matrix.index_of(p) {
                Some(i) => per_line[self.lines[i].index()] += 1,
                None => out.push(format!("{p} is not in the pool")),
            }
        }
        for line in PositionLine::ALL {
            let (lo, hi) = self.bounds.get(line);
            let n = per_line[line.index()];
            if n < lo || n > hi {
                out.push(format!("{n} {line}s outside [{lo}, {hi}]"));
            }
        }
        for p in &self.pinned {
            if !set.contains(p) {
                out.push(format!("pinned {p} missing"));
            }
        }
        for p in &self.excluded {
            if set.contains(p) {
                out.push(format!("excluded {p} selected"));
            }
        }
        if let Some(r) = &self.squad_restriction {
            let k = set.iter().filter(|p| r.players.contains(**p)).count();
            if k != r.count {
                out.push(format!("{k} squad players instead of {}", r.count));
            }
        }
        out
    }

    pub fn objective_of(&self, team: &[PlayerId]) -> Option<f64> {
        let idx: Option<Vec<usize>> = team.iter().map(|p| self.matrix.index_of(p)).collect();
        Some(team_objective(&self.matrix.values, &idx?))
    }

    pub(crate) fn solution(
        &self,
        team: &[usize],
        status: SolveStatus,
        bound_gap: f64,
        node_count: u64,
    ) -> TeamBuildSolution {
        let mut sorted = team.to_vec();
        sorted.sort_unstable();
        TeamBuildSolution {
            selected: sorted.iter().map(|&i| self.matrix.players[i].clone()).collect(),
            objective: team_objective(&self.matrix.values, &sorted),
            status,
            bound_gap,
            node_count,
        }
    }
}

/// Upper bound on the best completion of `chosen` using players from
/// `open`: the smaller of the top-r remaining edges bound and a
/// per-candidate bound that charges each new player half of its best edges
/// among the other open players.
pub(crate) fn completion_bound(values: &[Vec<f64>], chosen: &[usize], open: &[usize], partial: f64) -> f64 {
    let s = chosen.len();
    let r = TEAM_SIZE.saturating_sub(s);
    if r == 0 {
        return partial;
    }
    if open.len() < r {
        return f64::NEG_INFINITY;
    }
    let pair_slots = TEAM_SIZE * (TEAM_SIZE - 1) / 2 - s * s.saturating_sub(1) / 2;

    let mut edges = Vec::with_capacity(open.len() * (s + open.len()));
    let mut per_candidate = Vec::with_capacity(open.len());
    let mut row = Vec::with_capacity(open.len());
    for (k, &c) in open.iter().enumerate() {
        let to_chosen: f64 = chosen.iter().map(|&x| values[c][x]).sum();
        edges.extend(chosen.iter().map(|&x| values[c][x]));
        edges.extend(open[k + 1..].iter().map(|&d| values[c][d]));
        row.clear();
        row.extend(open.iter().filter(|&&d| d != c).map(|&d| values[c][d]));
        per_candidate.push(to_chosen + top_sum(&mut row, r - 1) / 2.0);
    }
    let by_edges = partial + top_sum(&mut edges, pair_slots);
    let by_candidates = partial + top_sum(&mut per_candidate, r);
    by_edges.min(by_candidates)
}

/// Sum of the `k` largest values (all of them if fewer). Reorders `v`.
pub(crate) fn top_sum(v: &mut [f64], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k < v.len() {
        v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    }
    v[..k.min(v.len())].iter().sum()
}

/// Slack used when pruning so rounding in the bound never cuts an optimum.
pub(crate) fn prune_tolerance(values: &[Vec<f64>]) -> f64 {
    let max = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-9 * (1.0 + max * (TEAM_SIZE * TEAM_SIZE) as f64)
}
