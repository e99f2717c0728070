//! Property tests for the invariants of every module.

mod common;

use common::{gaussian_vec, random_connected_mixing, random_polytope, rng};
use dsafe::estimation::{self, RadiusInputs};
use dsafe::geometry::{self, Membership, Polytope, ProjectionMode, RobustSafeSet};
use dsafe::losses::{self, bregman, Drift, FamilyParams, MinimizerTrace, MirrorMap};
use dsafe::network::{self, TopologyKind};
use dsafe::optimizer;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = geometry::DEFAULT_TOL;
const ITERS: usize = geometry::DEFAULT_MAX_ITER;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn polytope_projection_is_idempotent_and_nonexpansive(seed in any::<u64>(), d in 2usize..5, cuts in 1usize..5) {
        let mut r = rng(seed);
        let (poly, _) = random_polytope(&mut r, d, cuts);
        let z1 = gaussian_vec(&mut r, d, 4.0);
        let z2 = gaussian_vec(&mut r, d, 4.0);
        let p1 = geometry::project_polytope(&poly, &z1, TOL, ITERS).unwrap();
        let p2 = geometry::project_polytope(&poly, &z2, TOL, ITERS).unwrap();
        prop_assert!(poly.min_slack(&p1) >= -1e-9);
        let again = geometry::project_polytope(&poly, &p1, TOL, ITERS).unwrap();
        prop_assert!((&again - &p1).norm() <= 1e-9);
        prop_assert!((&p1 - &p2).norm() <= (&z1 - &z2).norm() + 1e-8);
        prop_assert!(geometry::kkt_residual(&poly, &z1, &p1, 1e-7) <= 1e-6);
    }

    #[test]
    fn zero_radius_robust_projection_is_polytope_projection(seed in any::<u64>(), d in 2usize..5) {
        let mut r = rng(seed);
        let (poly, _) = random_polytope(&mut r, d, 3);
        let z = gaussian_vec(&mut r, d, 4.0);
        let expected = geometry::project_polytope(&poly, &z, TOL, ITERS).unwrap();
        for mode in [ProjectionMode::ExactCone, ProjectionMode::Conservative] {
            let set = RobustSafeSet { a_hat: poly.a().clone(), b: poly.b().clone(), radius: 0.0, mode, norm_bound: poly.norm_bound() };
            let got = geometry::project_robust_set(&set, &z, TOL, ITERS).unwrap();
            prop_assert!((got - &expected).norm() <= 1e-8);
        }
    }

    #[test]
    fn robust_sets_transfer_safety(seed in any::<u64>(), radius in 0.0f64..0.3) {
        // if every row is within the radius, robust feasibility implies true feasibility
        let mut r = rng(seed);
        let (truth, _) = random_polytope(&mut r, 2, 2);
        let n = truth.constraints();
        let a_hat = DMatrix::from_fn(n, 2, |i, j| {
            truth.a()[(i, j)] + radius * 0.7 * r.random_range(-1.0..1.0)
        });
        prop_assume!(estimation::max_row_error(&a_hat, truth.a()) <= radius);
        for mode in [ProjectionMode::ExactCone, ProjectionMode::Conservative] {
            let set = RobustSafeSet { a_hat: a_hat.clone(), b: truth.b().clone(), radius, mode, norm_bound: truth.norm_bound() };
            let z = gaussian_vec(&mut r, 2, 5.0);
            let Ok(p) = geometry::project_robust_set(&set, &z, TOL, ITERS) else { continue };
            prop_assert!(set.contains(&p, 1e-8).unwrap());
            prop_assert!(truth.min_slack(&p) >= -1e-8);
        }
    }

    #[test]
    fn cone_projection_matches_its_constraint(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = gaussian_vec(&mut r, 3, 1.0);
        let b = r.random_range(0.1..2.0);
        let radius = r.random_range(0.0..0.5);
        let z = gaussian_vec(&mut r, 3, 3.0);
        let x = geometry::project_cone_constraint(&a, b, radius, &z, 1e-12).unwrap();
        prop_assert!(a.dot(&x) + radius * x.norm() <= b + 1e-9);
        // no feasible point on the segment towards z is closer
        for k in 1..20 {
            let s = k as f64 / 20.0;
            let y = &x * (1.0 - s) + &z * s;
            if a.dot(&y) + radius * y.norm() <= b {
                prop_assert!((&y - &z).norm() >= (&x - &z).norm() - 1e-9);
            }
        }
    }

    #[test]
    fn mixing_preserves_the_mean_and_meets_the_envelope(seed in any::<u64>(), m in 2usize..17) {
        let mut r = rng(seed);
        let top = network::validate_topology(&random_connected_mixing(&mut r, m)).unwrap();
        let values: Vec<DVector<f64>> = (0..m).map(|_| gaussian_vec(&mut r, 3, 1.0)).collect();
        let mean = values.iter().fold(DVector::zeros(3), |a, v| a + v) / m as f64;
        let mixed = network::mix_step(&values, &top).unwrap();
        let new_mean = mixed.iter().fold(DVector::zeros(3), |a, v| a + v) / m as f64;
        prop_assert!((new_mean - mean).norm() <= 1e-12);
        for k in 1..=30 {
            for i in 0..m {
                prop_assert!(network::mixing_error(&top, k, i) <= network::mixing_bound(&top, k) + 1e-12);
            }
        }
    }

    #[test]
    fn max_consensus_agrees_on_the_largest_estimate(seed in any::<u64>(), m in 1usize..10) {
        let mut r = rng(seed);
        let top = network::validate_topology(&random_connected_mixing(&mut r, m)).unwrap();
        let ests: Vec<DMatrix<f64>> = (0..m).map(|_| DMatrix::from_fn(2, 3, |_, _| r.random_range(-1.0..1.0))).collect();
        let out = network::max_consensus(&ests, &top).unwrap();
        let best = ests.iter().map(|e| e.norm()).fold(0.0, f64::max);
        prop_assert_eq!(out.estimate.norm(), best);
    }

    #[test]
    fn bregman_is_nonnegative_and_separately_convex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pos = |r: &mut rand_chacha::ChaCha8Rng| DVector::from_fn(3, |_, _| r.random_range(0.05..3.0));
        let x = pos(&mut r);
        let ys: Vec<DVector<f64>> = (0..4).map(|_| pos(&mut r)).collect();
        let mut w: Vec<f64> = (0..4).map(|_| r.random_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        let mix = ys.iter().zip(&w).fold(DVector::zeros(3), |a, (y, wi)| a + y * *wi);
        for mirror in [MirrorMap::Entropy, MirrorMap::Euclidean] {
            let lhs = bregman(mirror, &x, &mix).unwrap();
            let rhs: f64 = ys.iter().zip(&w).map(|(y, wi)| wi * bregman(mirror, &x, y).unwrap()).sum();
            prop_assert!(lhs >= 0.0);
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn path_length_is_additive(seed in any::<u64>(), n1 in 1usize..8, n2 in 1usize..8) {
        let mut r = rng(seed);
        let a: Vec<DVector<f64>> = (0..n1).map(|_| gaussian_vec(&mut r, 2, 1.0)).collect();
        let b: Vec<DVector<f64>> = (0..n2).map(|_| gaussian_vec(&mut r, 2, 1.0)).collect();
        let junction = (&b[0] - &a[n1 - 1]).norm();
        let whole: Vec<_> = a.iter().chain(&b).cloned().collect();
        let c = |v: Vec<DVector<f64>>| { let n = v.len(); losses::path_length(&MinimizerTrace::from_points(v, vec![0.0; n])) };
        let (ca, cb, cw) = (c(a), c(b), c(whole));
        prop_assert!((cw - (ca + cb + junction)).abs() <= 1e-12);
    }

    #[test]
    fn nonconvex_losses_are_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let lo = DVector::from_vec(vec![0.5, 0.5, 0.5]);
        let hi = DVector::from_vec(vec![1.5, 2.0, 1.5]);
        let params = FamilyParams { d: 3, m: 3, horizon: 20, drift: Drift::RandomWalk { step: 0.02 }, spread: 0.1, start: None };
        let seq = losses::make_nonconvex_family(&params, &lo, &hi, 0.1, MirrorMap::Entropy, &mut r).unwrap();
        let g = seq.constants.gradient_bound;
        let gf = seq.constants.mirror_gradient_bound.unwrap();
        for _ in 0..50 {
            let x = DVector::from_fn(3, |j, _| r.random_range(lo[j]..hi[j]));
            let (i, t) = (r.random_range(0..3), r.random_range(0..20));
            let u = MirrorMap::Entropy.q(&x);
            prop_assert!((seq.local_loss(i, t, &x) - seq.mirror_loss(i, t, &u)).abs() <= 1e-12);
            let grad = seq.local_gradient(i, t, &x);
            prop_assert!(grad.norm() <= g + 1e-12);
            prop_assert!(seq.mirror_gradient(i, t, &u).norm() <= gf + 1e-12);
            // central differences
            let h = 1e-6;
            for j in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (seq.local_loss(i, t, &xp) - seq.local_loss(i, t, &xm)) / (2.0 * h);
                prop_assert!((fd - grad[j]).abs() <= 1e-5 * grad.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn convex_gradient_bound_holds_on_the_safe_set(seed in any::<u64>()) {
        let mut r = rng(seed);
        let truth = Polytope::bounding_box(&[-1.0, -1.0], &[1.0, 1.0]);
        let region = truth.with_offsets_lowered(0.25);
        let params = FamilyParams { d: 2, m: 4, horizon: 30, drift: Drift::RandomWalk { step: 0.05 }, spread: 0.3, start: None };
        let seq = losses::make_convex_tracking(&params, &region, &truth, &mut r).unwrap();
        for _ in 0..200 {
            let x = DVector::from_fn(2, |_, _| r.random_range(-1.0..1.0));
            prop_assert!(seq.local_gradient(r.random_range(0..4), r.random_range(0..30), &x).norm() <= seq.constants.gradient_bound + 1e-12);
        }
        let t = r.random_range(0..30);
        let x = losses::hindsight_minimizer(&seq, t, &truth, 1e-10).unwrap();
        prop_assert!(truth.min_slack(&x) >= -1e-9);
        prop_assert!((x - seq.mean_target(t)).norm() <= 1e-9);
    }

    #[test]
    fn hindsight_minimizer_on_a_general_polytope_is_stationary(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (truth, _) = random_polytope(&mut r, 2, 3);
        let targets = vec![vec![gaussian_vec(&mut r, 2, 3.0), gaussian_vec(&mut r, 2, 3.0)]];
        let seq = losses::LossSequence::from_targets(losses::LossKind::ConvexTracking, MirrorMap::Entropy, &targets, None, &truth);
        let x = losses::hindsight_minimizer(&seq, 0, &truth, 1e-9).unwrap();
        prop_assert!(truth.min_slack(&x) >= -1e-9);
        let step = &x - seq.global_gradient(0, &x) / 2.0;
        let back = geometry::project_polytope(&truth, &step, 1e-12, ITERS).unwrap();
        prop_assert!(2.0 * (back - &x).norm() <= 1e-6);
    }

    #[test]
    fn omd_iterates_stay_in_the_box(seed in any::<u64>()) {
        let mut r = rng(seed);
        let lo = DVector::from_vec(vec![0.0625, 0.1]);
        let hi = DVector::from_vec(vec![0.5625, 1.0]);
        let mut u = DVector::from_vec(vec![0.3, 0.4]);
        for _ in 0..100 {
            let g = gaussian_vec(&mut r, 2, 5.0);
            u = optimizer::omd_local_step(&u, &g, r.random_range(0.0..1.0), MirrorMap::Entropy, &lo, &hi).unwrap();
            prop_assert!(u.iter().zip(lo.iter().zip(hi.iter())).all(|(v, (l, h))| *v >= *l && *v <= *h && *v > 0.0));
        }
    }

    #[test]
    fn confidence_radius_decreases_in_t0_and_t(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = RadiusInputs {
            horizon: r.random_range(100..100_000), rho: r.random_range(0.5..2.0), noise_r: r.random_range(0.0..0.5),
            d: r.random_range(1..6), m: r.random_range(1..17), t0: r.random_range(10..5000),
            norm_bound: r.random_range(0.5..3.0), lambda: r.random_range(0.001..2.0), delta: r.random_range(0.01..0.5),
            n: r.random_range(1..7), gamma: r.random_range(0.05..0.9), sigma_zeta: r.random_range(0.1..1.0),
            row_bound: r.random_range(0.5..2.0),
        };
        let base = estimation::confidence_radius(&p).unwrap();
        let doubled_t0 = RadiusInputs { t0: p.t0 * 2, ..p };
        prop_assert!(estimation::confidence_radius(&doubled_t0).unwrap() < base);
        let doubled_t = RadiusInputs { horizon: p.horizon * 2, ..p };
        prop_assert!(estimation::confidence_radius(&doubled_t).unwrap() < base);
    }
}

#[test]
fn named_topologies_meet_the_mixing_envelope() {
    for kind in [TopologyKind::Complete, TopologyKind::Ring, TopologyKind::Path, TopologyKind::Star] {
        for m in 1..=16 {
            let top = network::generate(kind, m).unwrap();
            for k in 1..=30 {
                for i in 0..m {
                    assert!(network::mixing_error(&top, k, i) <= network::mixing_bound(&top, k) + 1e-12, "{kind:?} m={m} k={k}");
                }
            }
        }
    }
}
