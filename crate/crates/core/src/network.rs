//! Communication graph: mixing-matrix validation, spectral/diameter
//! diagnostics, one-round averaging and max-consensus.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Exact-stochasticity tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Inputs within this distance of stochastic are repaired instead of rejected.
pub const REPAIR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("mixing matrix must be square with finite entries (got {rows}x{cols})")]
    Malformed { rows: usize, cols: usize },
    #[error("mixing matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("mixing matrix is not doubly stochastic: row {row} sums to {sum}")]
    NotDoublyStochastic { row: usize, sum: f64 },
    #[error("mixing matrix has a non-positive self weight at agent {0}")]
    ZeroDiagonal(usize),
    #[error("communication graph is disconnected (agent {0} unreachable from agent 0)")]
    Disconnected(usize),
    #[error("expected {expected} agent values of dimension {dim}, got a mismatch")]
    DimensionMismatch { expected: usize, dim: usize },
    #[error("max-consensus estimates have mismatched shapes")]
    ShapeMismatch,
    #[error("unknown topology generator `{0}`")]
    UnknownGenerator(String),
}

/// A validated symmetric doubly stochastic mixing matrix together with its
/// spectral gap and graph diameter.
#[derive(Debug, Clone)]
pub struct NetworkTopology {
    p: DMatrix<f64>,
    beta: f64,
    diameter: usize,
    neighbors: Vec<Vec<usize>>,
}

impl NetworkTopology {
    pub fn agents(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Second largest singular value of `P`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// Neighbours of agent `i` in the support graph, including `i` itself.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `(I + P) / 2`, the lazy mixing matrix EXTRA uses.
    pub fn lazy_matrix(&self) -> DMatrix<f64> {
        let m = self.agents();
        (DMatrix::identity(m, m) + &self.p) * 0.5
    }

    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.p[(j, i)]
    }
}

/// Validates `p` and computes its diagnostics.
///
/// Checks run in a fixed order and the first violated invariant is reported.
/// A matrix whose row sums are off by at most [`REPAIR_TOL`] has the
/// difference absorbed into its diagonal, which keeps it symmetric.
pub fn validate_topology(p: &DMatrix<f64>) -> Result<NetworkTopology, NetworkError> {
    let m = p.nrows();
    if m == 0 || p.ncols() != m || p.iter().any(|v| !v.is_finite()) {
        return Err(NetworkError::Malformed { rows: p.nrows(), cols: p.ncols() });
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if (p[(i, j)] - p[(j, i)]).abs() > STOCHASTIC_TOL {
                return Err(NetworkError::NotSymmetric { i, j });
            }
        }
    }
    let mut p = p.clone();
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = avg;
            p[(j, i)] = avg;
        }
    }
    for row in 0..m {
        if p.row(row).iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            let sum = p.row(row).sum();
            return Err(NetworkError::NotDoublyStochastic { row, sum });
        }
        let sum = p.row(row).sum();
        let gap = 1.0 - sum;
        if gap.abs() > REPAIR_TOL {
            return Err(NetworkError::NotDoublyStochastic { row, sum });
        }
        if gap.abs() > STOCHASTIC_TOL {
            p[(row, row)] += gap;
        }
    }
    for i in 0..m {
        if p[(i, i)] <= 0.0 {
            return Err(NetworkError::ZeroDiagonal(i));
        }
    }
    let neighbors: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..m).filter(|&j| p[(j, i)] > 0.0).collect())
        .collect();
    let dist = bfs(&neighbors, 0);
    if let Some(unreached) = dist.iter().position(Option::is_none) {
        return Err(NetworkError::Disconnected(unreached));
    }
    let beta = second_largest_singular_value(&p);
    let diameter = diameter_of(&neighbors);
    Ok(NetworkTopology { p, beta, diameter, neighbors })
}

/// σ₂(P) from a one-sided Jacobi SVD; 0 for a single agent.
pub fn second_largest_singular_value(p: &DMatrix<f64>) -> f64 {
    let sv = linalg::singular_values(p);
    sv.get(1).copied().unwrap_or(0.0)
}

fn bfs(neighbors: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; neighbors.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in &neighbors[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn diameter_of(neighbors: &[Vec<usize>]) -> usize {
    (0..neighbors.len())
        .map(|s| bfs(neighbors, s).into_iter().flatten().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// Longest shortest path (in hops) of the support graph.
pub fn graph_diameter(topology: &NetworkTopology) -> usize {
    diameter_of(&topology.neighbors)
}

/// One synchronous averaging round: `out_i = Σ_j P[j][i] · values_j`.
pub fn mix_step(
    values: &[DVector<f64>],
    topology: &NetworkTopology,
) -> Result<Vec<DVector<f64>>, NetworkError> {
    let m = topology.agents();
    let dim = values.first().map_or(0, |v| v.len());
    if values.len() != m || values.iter().any(|v| v.len() != dim) {
        return Err(NetworkError::DimensionMismatch { expected: m, dim });
    }
    Ok((0..m)
        .into_par_iter()
        .map(|i| {
            let mut out = DVector::zeros(dim);
            for &j in topology.neighbors(i) {
                out.axpy(topology.p[(j, i)], &values[j], 1.0);
            }
            out
        })
        .collect())
}

/// Same as [`mix_step`] for matrix-valued agent states.
pub fn mix_matrices(
    mixing: &DMatrix<f64>,
    values: &[DMatrix<f64>],
) -> Vec<DMatrix<f64>> {
    let m = values.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut out = DMatrix::zeros(values[i].nrows(), values[i].ncols());
            for (j, v) in values.iter().enumerate() {
                let w = mixing[(j, i)];
                if w != 0.0 {
                    out += v * w;
                }
            }
            out
        })
        .collect()
}

/// `Σ_j |[P^k]_{ji} − 1/m|`, the deviation of column `i` of `P^k` from uniform.
pub fn mixing_error(topology: &NetworkTopology, k: usize, i: usize) -> f64 {
    let m = topology.agents();
    let mut col = DVector::from_fn(m, |j, _| if j == i { 1.0 } else { 0.0 });
    for _ in 0..k {
        col = &topology.p * col;
    }
    let uniform = 1.0 / m as f64;
    col.iter().map(|v| (v - uniform).abs()).sum()
}

/// Geometric envelope `√m · β^k` for [`mixing_error`].
pub fn mixing_bound(topology: &NetworkTopology, k: usize) -> f64 {
    (topology.agents() as f64).sqrt() * topology.beta.powi(k as i32)
}

/// Result of max-consensus: the agreed estimate and the agent that owned it.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxConsensus {
    pub estimate: DMatrix<f64>,
    pub owner: usize,
}

/// Runs `D_G` rounds in which every agent adopts the largest-Frobenius-norm
/// estimate among its neighbours (itself included). Ties go to the lower
/// owner index.
pub fn max_consensus(
    estimates: &[DMatrix<f64>],
    topology: &NetworkTopology,
) -> Result<MaxConsensus, NetworkError> {
    let m = topology.agents();
    if estimates.len() != m {
        return Err(NetworkError::DimensionMismatch { expected: m, dim: estimates.len() });
    }
    let shape = estimates[0].shape();
    if estimates.iter().any(|e| e.shape() != shape) {
        return Err(NetworkError::ShapeMismatch);
    }
    let norms: Vec<f64> = estimates.iter().map(|e| e.norm()).collect();
    // each agent only ever holds a pointer to some owner's estimate
    let mut held: Vec<usize> = (0..m).collect();
    let better = |a: usize, b: usize| norms[a] > norms[b] || (norms[a] == norms[b] && a < b);
    for _ in 0..topology.diameter() {
        held = (0..m)
            .map(|i| {
                topology
                    .neighbors(i)
                    .iter()
                    .map(|&j| held[j])
                    .fold(held[i], |best, cand| if better(cand, best) { cand } else { best })
            })
            .collect();
    }
    debug_assert!(held.iter().all(|&o| o == held[0]));
    let owner = held[0];
    Ok(MaxConsensus { estimate: estimates[owner].clone(), owner })
}

/// Named topology generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Complete,
    Ring,
    Path,
    Star,
}

impl std::str::FromStr for TopologyKind {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(Self::Complete),
            "ring" => Ok(Self::Ring),
            "path" => Ok(Self::Path),
            "star" => Ok(Self::Star),
            other => Err(NetworkError::UnknownGenerator(other.to_string())),
        }
    }
}

/// Builds a mixing matrix for a named graph with Metropolis-Hastings weights
/// `1 / (1 + max(deg_i, deg_j))`; the complete graph gets exact `1/m` averaging.
pub fn generate(kind: TopologyKind, m: usize) -> Result<NetworkTopology, NetworkError> {
    if m == 0 {
        return Err(NetworkError::Malformed { rows: 0, cols: 0 });
    }
    if kind == TopologyKind::Complete {
        return validate_topology(&DMatrix::from_element(m, m, 1.0 / m as f64));
    }
    let mut adj = vec![vec![false; m]; m];
    let mut link = |a: usize, b: usize| {
        if a != b {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    };
    match kind {
        TopologyKind::Ring => (0..m).for_each(|i| link(i, (i + 1) % m)),
        TopologyKind::Path => (1..m).for_each(|i| link(i - 1, i)),
        TopologyKind::Star => (1..m).for_each(|i| link(0, i)),
        TopologyKind::Complete => unreachable!(),
    }
    validate_topology(&metropolis_weights(&adj))
}

/// Metropolis-Hastings weights for an undirected adjacency relation.
pub fn metropolis_weights(adj: &[Vec<bool>]) -> DMatrix<f64> {
    let m = adj.len();
    let deg: Vec<usize> = adj.iter().map(|r| r.iter().filter(|&&e| e).count()).collect();
    let mut p = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j && adj[i][j] {
                p[(i, j)] = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
            }
        }
        let off: f64 = p.row(i).sum();
        p[(i, i)] = 1.0 - off;
    }
    p
}

/// Rows of the mixing-error diagnostic: `(k, agent, deviation, bound)`.
pub fn mixing_trace(topology: &NetworkTopology, max_k: usize) -> Vec<(usize, usize, f64, f64)> {
    let mut rows = Vec::with_capacity(max_k * topology.agents());
    for k in 1..=max_k {
        let bound = mixing_bound(topology, k);
        for i in 0..topology.agents() {
            rows.push((k, i, mixing_error(topology, k, i), bound));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(m: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(m, m, v)
    }

    #[test]
    fn averaging_matrix_has_zero_beta() {
        let t = validate_topology(&mat(2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        assert_eq!(t.agents(), 2);
        assert!(t.beta().abs() < 1e-12);
        assert_eq!(t.diameter(), 1);
    }

    #[test]
    fn identity_is_disconnected() {
        let err = validate_topology(&mat(2, &[1.0, 0.0, 0.0, 1.0])).unwrap_err();
        assert_eq!(err, NetworkError::Disconnected(1));
    }

    #[test]
    fn two_by_two_beta() {
        let t = validate_topology(&mat(2, &[0.75, 0.25, 0.25, 0.75])).unwrap();
        assert!((t.beta() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_in_order() {
        assert!(matches!(
            validate_topology(&mat(2, &[0.5, 0.4, 0.5, 0.6])),
            Err(NetworkError::NotSymmetric { .. })
        ));
        assert!(matches!(
            validate_topology(&mat(2, &[0.5, 0.4, 0.4, 0.5])),
            Err(NetworkError::NotDoublyStochastic { .. })
        ));
        assert!(matches!(
            validate_topology(&mat(2, &[0.0, 1.0, 1.0, 0.0])),
            Err(NetworkError::ZeroDiagonal(0))
        ));
    }

    #[test]
    fn near_stochastic_input_is_repaired() {
        let t = validate_topology(&mat(2, &[0.75 + 5e-10, 0.25, 0.25, 0.75])).unwrap();
        for r in 0..2 {
            assert!((t.matrix().row(r).sum() - 1.0).abs() < 1e-15);
        }
        assert!(validate_topology(&mat(2, &[0.75 + 5e-9, 0.25, 0.25, 0.75])).is_err());
    }

    #[test]
    fn diameters_of_named_graphs() {
        assert_eq!(generate(TopologyKind::Path, 3).unwrap().diameter(), 2);
        assert_eq!(generate(TopologyKind::Complete, 5).unwrap().diameter(), 1);
        assert_eq!(generate(TopologyKind::Ring, 6).unwrap().diameter(), 3);
        assert_eq!(generate(TopologyKind::Star, 6).unwrap().diameter(), 2);
        let ring = generate(TopologyKind::Ring, 6).unwrap();
        assert_eq!(graph_diameter(&ring), 3);
    }

    #[test]
    fn mix_step_examples() {
        let t = validate_topology(&mat(2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        let out = mix_step(&[DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])], &t).unwrap();
        for o in &out {
            assert_eq!(o.as_slice(), &[0.5, 0.5]);
        }
        let ring = generate(TopologyKind::Ring, 5).unwrap();
        let v = DVector::from_vec(vec![0.3, -1.2, 4.0]);
        let out = mix_step(&vec![v.clone(); 5], &ring).unwrap();
        for o in &out {
            assert!((o - &v).norm() < 1e-15);
        }
        assert!(mix_step(&vec![v; 4], &ring).is_err());
    }

    #[test]
    fn mixing_error_examples() {
        let avg = validate_topology(&mat(2, &[0.5, 0.5, 0.5, 0.5])).unwrap();
        assert_eq!(mixing_error(&avg, 3, 1), 0.0);
        let t = validate_topology(&mat(2, &[0.75, 0.25, 0.25, 0.75])).unwrap();
        let e = mixing_error(&t, 1, 0);
        assert!((e - 0.5).abs() < 1e-15);
        assert!(e <= mixing_bound(&t, 1));
    }

    #[test]
    fn max_consensus_examples() {
        let ring = generate(TopologyKind::Ring, 3).unwrap();
        let ests: Vec<DMatrix<f64>> = [1.0, 3.0, 2.0]
            .iter()
            .map(|&s| DMatrix::from_element(1, 1, s))
            .collect();
        let out = max_consensus(&ests, &ring).unwrap();
        assert_eq!(out.estimate[(0, 0)], 3.0);
        assert_eq!(out.owner, 1);

        let same = vec![DMatrix::from_element(2, 2, 0.7); 3];
        assert_eq!(max_consensus(&same, &ring).unwrap().estimate, same[0]);

        let ring6 = generate(TopologyKind::Ring, 6).unwrap();
        let mut tied: Vec<DMatrix<f64>> = (0..6).map(|_| DMatrix::from_element(1, 2, 0.1)).collect();
        tied[2] = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        tied[5] = DMatrix::from_row_slice(1, 2, &[4.0, 3.0]);
        let out = max_consensus(&tied, &ring6).unwrap();
        assert_eq!(out.owner, 2);

        let bad = vec![DMatrix::zeros(1, 1), DMatrix::zeros(2, 1), DMatrix::zeros(1, 1)];
        assert_eq!(max_consensus(&bad, &ring).unwrap_err(), NetworkError::ShapeMismatch);
    }
}
