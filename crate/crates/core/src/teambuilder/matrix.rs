//! Pairwise chemistry matrices over a player pool.

use serde::{Deserialize, Serialize};

use super::TeamError;
use crate::datamodel::PlayerId;

/// Expected JOI90 and JDI90 for any pair in a pool.
pub trait PairChemistry {
    fn joi_jdi(&self, p: &PlayerId, q: &PlayerId) -> Result<(f64, f64), TeamError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemistryMatrix {
    /// Sorted by id; row and column `i` belong to `players[i]`.
    pub players: Vec<PlayerId>,
    pub values: Vec<Vec<f64>>,
    pub alpha: f64,
    pub standardized: bool,
}

fn sorted_permutation(players: &[PlayerId]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..players.len()).collect();
    perm.sort_by(|&a, &b| players[a].cmp(&players[b]));
    perm
}

fn check_square(name: &str, m: &[Vec<f64>], n: usize) -> Result<(), TeamError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(TeamError::InvalidProblem(format!("{name} matrix is not {n}x{n}")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(TeamError::InvalidProblem(format!(
            "{name} matrix has non-finite entries"
        )));
    }
    Ok(())
}

/// `(M + Mᵀ) / 2` with a zero diagonal, rows permuted by `perm`.
fn symmetrize(m: &[Vec<f64>], perm: &[usize]) -> Vec<Vec<f64>> {
    let n = perm.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (a, b) = (perm[i], perm[j]);
                out[i][j] = (m[a][b] + m[b][a]) / 2.0;
            }
        }
    }
    out
}

/// Z-scores the off-diagonal entries over the pool's unordered pairs.
fn standardize(m: &mut [Vec<f64>]) {
    let mut vals = Vec::new();
    for (i, row) in m.iter().enumerate() {
        vals.extend_from_slice(&row[i + 1..]);
    }
    if vals.is_empty() {
        return;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
    let sd = var.sqrt();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i != j {
                *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
            }
        }
    }
}

impl ChemistryMatrix {
    /// Takes an arbitrary square matrix over `players`, symmetrizes it and
    /// reorders the pool by player id.
    pub fn from_values(players: Vec<PlayerId>, values: &[Vec<f64>]) -> Result<Self, TeamError> {
        check_square("chemistry", values, players.len())?;
        let perm = sorted_permutation(&players);
        check_unique(&players, &perm)?;
        Ok(Self {
            players: perm.iter().map(|&i| players[i].clone()).collect(),
            values: symmetrize(values, &perm),
            alpha: 1.0,
            standardized: false,
        })
    }

    /// `alpha · joi + (1 − alpha) · jdi` after symmetrizing each component
    /// and optionally z-scoring it over the pool pairs.
    pub fn from_components(
        players: Vec<PlayerId>,
        joi: &[Vec<f64>],
        jdi: &[Vec<f64>],
        alpha: f64,
        standardized: bool,
    ) -> Result<Self, TeamError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(TeamError::InvalidProblem(format!("alpha {alpha} is outside [0, 1]")));
        }
        let n = players.len();
        check_square("JOI", joi, n)?;
        check_square("JDI", jdi, n)?;
        let perm = sorted_permutation(&players);
        check_unique(&players, &perm)?;
        let mut o = symmetrize(joi, &perm);
        let mut d = symmetrize(jdi, &perm);
        if standardized {
            standardize(&mut o);
            standardize(&mut d);
        }
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    // Skip the zero-weight term so that its inputs cannot leak in.
                    values[i][j] = if alpha == 1.0 {
                        o[i][j]
                    } else if alpha == 0.0 {
                        d[i][j]
                    } else {
                        alpha * o[i][j] + (1.0 - alpha) * d[i][j]
                    };
                }
            }
        }
        Ok(Self {
            players: perm.iter().map(|&i| players[i].clone()).collect(),
            values,
            alpha,
            standardized,
        })
    }

    pub fn build(
        pool: &[PlayerId],
        source: &dyn PairChemistry,
        alpha: f64,
        standardized: bool,
    ) -> Result<Self, TeamError> {
        let n = pool.len();
        let mut joi = vec![vec![0.0; n]; n];
        let mut jdi = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let (o, d) = source.joi_jdi(&pool[i], &pool[j])?;
                joi[i][j] = o;
                joi[j][i] = o;
                jdi[i][j] = d;
                jdi[j][i] = d;
            }
        }
        Self::from_components(pool.to_vec(), &joi, &jdi, alpha, standardized)
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn index_of(&self, p: &PlayerId) -> Option<usize> {
        self.players.binary_search(p).ok()
    }

    pub fn get(&self, p: &PlayerId, q: &PlayerId) -> Option<f64> {
        Some(self.values[self.index_of(p)?][self.index_of(q)?])
    }
}

fn check_unique(players: &[PlayerId], perm: &[usize]) -> Result<(), TeamError> {
    for w in perm.windows(2) {
        if players[w[0]] == players[w[1]] {
            return Err(TeamError::InvalidProblem(format!(
                "player {} appears twice in the pool",
                players[w[0]]
            )));
        }
    }
    Ok(())
}
