//! Exhaustive enumeration of every eleven, for checking the solvers.
//!
//! Deliberately shares no search or feasibility code with them: constraints
//! are checked directly on each candidate team.

use super::{SolveStatus, TeamBuildProblem, TeamBuildSolution, TeamError, TEAM_SIZE};

pub const ORACLE_MAX_POOL: usize = 16;

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn brute_force_oracle(problem: &TeamBuildProblem) -> Result<TeamBuildSolution, TeamError> {
    let m = &problem.matrix;
    let n = m.players.len();
    if n > ORACLE_MAX_POOL {
        return Err(TeamError::PoolTooLarge {
            size: n,
            max: ORACLE_MAX_POOL,
        });
    }
    if n < TEAM_SIZE {
        return Err(TeamError::Infeasible(format!("pool of {n} cannot field eleven")));
    }
    let pinned: Vec<bool> = m.players.iter().map(|p| problem.pinned.contains(p)).collect();
    let excluded: Vec<bool> = m.players.iter().map(|p| problem.excluded.contains(p)).collect();
    let in_squad: Vec<bool> = m
        .players
        .iter()
        .map(|p| {
            problem
                .squad_restriction
                .as_ref()
                .is_some_and(|r| r.players.contains(p))
        })
        .collect();
    let n_pinned = pinned.iter().filter(|&&b| b).count();

    let mut idx: Vec<usize> = (0..TEAM_SIZE).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut visited = 0u64;
    loop {
        visited += 1;
        let mut ok = idx.iter().filter(|&&i| pinned[i]).count() == n_pinned && idx.iter().all(|&i| !excluded[i]);
        if ok {
            let mut per_line = [0usize; 4];
            for &i in &idx {
                per_line[problem.lines[i].index()] += 1;
            }
            let b = &problem.bounds;
            ok = [b.goalkeeper, b.defender, b.midfielder, b.forward]
                .iter()
                .zip(per_line)
                .all(|(&(lo, hi), c)| lo <= c && c <= hi);
        }
        if ok {
            if let Some(r) = &problem.squad_restriction {
                ok = idx.iter().filter(|&&i| in_squad[i]).count() == r.count;
            }
        }
        if ok {
            let mut obj = 0.0;
            for a in 0..TEAM_SIZE {
                for b in a + 1..TEAM_SIZE {
                    obj += m.values[idx[a]][idx[b]];
                }
            }
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, idx.clone()));
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    let (objective, team) =
        best.ok_or_else(|| TeamError::Infeasible("no eleven satisfies the constraints".to_string()))?;
    Ok(TeamBuildSolution {
        selected: team.iter().map(|&i| m.players[i].clone()).collect(),
        objective,
        status: SolveStatus::Optimal,
        bound_gap: 0.0,
        node_count: visited,
    })
}
