//! Depth-first branch and bound over include/exclude decisions.

use super::{
    completion_bound, prune_tolerance, solve_heuristic, team_objective, Prepared, SolveStatus, TeamBuildProblem,
    TeamBuildSolution, TeamError, TEAM_SIZE,
};

struct Search<'a> {
    values: &'a [Vec<f64>],
    prep: &'a Prepared,
    /// Undecided candidates in branching order.
    order: Vec<usize>,
    chosen: Vec<usize>,
    partial: f64,
    tol: f64,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
}

impl Search<'_> {
    fn offer(&mut self) {
        let mut team = self.chosen.clone();
        team.sort_unstable();
        let obj = team_objective(self.values, &team);
        let better = match &self.best {
            None => true,
            Some((b, set)) => obj > *b || (obj == *b && team < *set),
        };
        if better {
            self.best = Some((obj, team));
        }
    }

    fn dfs(&mut self, k: usize) {
        self.nodes += 1;
        if self.chosen.len() == TEAM_SIZE {
            if self.prep.valid_team(&self.chosen) {
                self.offer();
            }
            return;
        }
        let open = &self.order[k..];
        if !self.prep.feasible(&self.prep.counts(&self.chosen, open)) {
            return;
        }
        if let Some((best, _)) = &self.best {
            let bound = completion_bound(self.values, &self.chosen, open, self.partial);
            if bound < best - self.tol {
                return;
            }
        }
        let c = self.order[k];
        let gain: f64 = self.chosen.iter().map(|&x| self.values[c][x]).sum();
        self.chosen.push(c);
        self.partial += gain;
        self.dfs(k + 1);
        self.partial -= gain;
        self.chosen.pop();
        self.dfs(k + 1);
    }
}

/// Maximum-chemistry eleven, optimal up to the pruning tolerance. Among
/// optima with identical objective the lexicographically smallest id set wins.
pub fn solve_exact(problem: &TeamBuildProblem) -> Result<TeamBuildSolution, TeamError> {
    let prep = problem.check()?;
    let values = &problem.matrix.values;
    let incumbent = solve_heuristic(problem)?;
    let seed: Vec<usize> = incumbent
        .selected
        .iter()
        .filter_map(|p| problem.matrix.index_of(p))
        .collect();

    // Candidates with large row sums first: good teams are found early.
    let mut order = prep.candidates.clone();
    let row_sum = |i: usize| -> f64 { prep.candidates.iter().chain(&prep.pinned).map(|&j| values[i][j]).sum() };
    let sums: Vec<f64> = (0..prep.n)
        .map(|i| if prep.is_pinned[i] { 0.0 } else { row_sum(i) })
        .collect();
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));

    let mut search = Search {
        values,
        prep: &prep,
        order,
        chosen: prep.pinned.clone(),
        partial: team_objective(values, &prep.pinned),
        tol: prune_tolerance(values),
        best: None,
        nodes: 0,
    };
    if prep.valid_team(&seed) {
        let mut s = seed;
        s.sort_unstable();
        search.best = Some((team_objective(values, &s), s));
    }
    search.dfs(0);
    let nodes = search.nodes;
    match search.best {
        Some((_, team)) => Ok(problem.solution(&team, SolveStatus::Optimal, 0.0, nodes)),
        None => Err(TeamError::Infeasible("no eleven satisfies the constraints".to_string())),
    }
}
