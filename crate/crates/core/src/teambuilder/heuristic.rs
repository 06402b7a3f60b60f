//! Greedy construction followed by 1-swap local search.

use super::{
    completion_bound, team_objective, Prepared, SolveStatus, TeamBuildProblem, TeamBuildSolution, TeamError, TEAM_SIZE,
};

fn greedy(values: &[Vec<f64>], prep: &Prepared) -> Option<Vec<usize>> {
    let mut team = prep.pinned.clone();
    let mut open: Vec<usize> = prep.candidates.clone();
    while team.len() < TEAM_SIZE {
        let mut best: Option<(f64, usize)> = None;
        for (k, &c) in open.iter().enumerate() {
            team.push(c);
            let rest: Vec<usize> = open.iter().copied().filter(|&x| x != c).collect();
            let ok = prep.feasible(&prep.counts(&team, &rest));
            team.pop();
            if !ok {
                continue;
            }
            let gain: f64 = team.iter().map(|&x| values[c][x]).sum();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, k));
            }
        }
        let (_, k) = best?;
        team.push(open.remove(k));
    }
    Some(team)
}

/// Repeatedly applies the best improving swap of one unpinned member for one
/// outside candidate until none improves the objective.
fn local_search(values: &[Vec<f64>], prep: &Prepared, team: &mut [usize]) -> u64 {
    let mut moves = 0;
    loop {
        let current = team_objective(values, team);
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..team.len() {
            let out = team[slot];
            if prep.is_pinned[out] {
                continue;
            }
            for &c in &prep.candidates {
                if team.contains(&c) {
                    continue;
                }
                team[slot] = c;
                if prep.valid_team(team) {
                    let obj = team_objective(values, team);
                    if obj > current && best.is_none_or(|(b, _, _)| obj > b) {
                        best = Some((obj, slot, c));
                    }
                }
                team[slot] = out;
            }
        }
        match best {
            Some((_, slot, c)) => {
                team[slot] = c;
                moves += 1;
            }
            None => return moves,
        }
    }
}

pub fn solve_heuristic(problem: &TeamBuildProblem) -> Result<TeamBuildSolution, TeamError> {
    let prep = problem.check()?;
    let values = &problem.matrix.values;
    let mut team = greedy(values, &prep)
        .ok_or_else(|| TeamError::Infeasible("greedy construction found no feasible eleven".to_string()))?;
    let moves = local_search(values, &prep, &mut team);
    let root = completion_bound(
        values,
        &prep.pinned,
        &prep.candidates,
        team_objective(values, &prep.pinned),
    );
    let sol = problem.solution(&team, SolveStatus::Heuristic, 0.0, moves);
    Ok(TeamBuildSolution {
        bound_gap: (root - sol.objective).max(0.0),
        ..sol
    })
}
