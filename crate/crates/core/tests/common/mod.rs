#![allow(dead_code)]

use dsafe::geometry::Polytope;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(r: &mut ChaCha8Rng, d: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| scale * r.sample::<f64, _>(StandardNormal))
}

/// Bounded polytope: a box of half-width 3 plus random cuts that keep a
/// random centre strictly inside.
pub fn random_polytope(r: &mut ChaCha8Rng, d: usize, cuts: usize) -> (Polytope, DVector<f64>) {
    let centre = gaussian_vec(r, d, 0.3);
    let n = 2 * d + cuts;
    let mut a = DMatrix::zeros(n, d);
    let mut b = DVector::zeros(n);
    for j in 0..d {
        a[(j, j)] = 1.0;
        b[j] = 3.0;
        a[(d + j, j)] = -1.0;
        b[d + j] = 3.0;
    }
    for k in 2 * d..n {
        let row = gaussian_vec(r, d, 1.0);
        let offset = row.dot(&centre) + r.random_range(0.2..1.5);
        a.row_mut(k).copy_from(&row.transpose());
        b[k] = offset;
    }
    (Polytope::new(a, b).expect("well formed"), centre)
}

/// Symmetric doubly stochastic matrix of a random connected graph
/// (spanning path plus random extra edges) with Metropolis weights.
pub fn random_connected_mixing(r: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let mut adj = vec![vec![false; m]; m];
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    for w in order.windows(2) {
        adj[w[0]][w[1]] = true;
        adj[w[1]][w[0]] = true;
    }
    for i in 0..m {
        for j in i + 1..m {
            if r.random_bool(0.25) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    dsafe::network::metropolis_weights(&adj)
}
