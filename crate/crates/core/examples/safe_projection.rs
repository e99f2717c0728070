//! Euclidean projections: a polytope, a single cone constraint, and the
//! robust safe set in both of its readings, with KKT certificates.
//!
//! cargo run --example safe_projection

use dsafe::geometry::{self, Polytope, ProjectionMode, RobustSafeSet};
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = geometry::DEFAULT_TOL;
    let iters = geometry::DEFAULT_MAX_ITER;

    let simplex = Polytope::new(
        DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]),
        DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
    )?;
    for z in [[1.0, 1.0, 1.0], [2.0, -1.0, 0.3], [0.1, 0.2, 0.3]] {
        let z = DVector::from_row_slice(&z);
        let p = geometry::project_polytope_traced(&simplex, &z, tol, iters)?;
        println!(
            "simplex  z={:?} -> {:?}  ({} sweeps, kkt {:.1e})",
            z.as_slice(),
            p.point.as_slice(),
            p.iterations,
            geometry::kkt_residual(&simplex, &z, &p.point, 1e-8)
        );
    }

    let a = DVector::from_vec(vec![1.0, 0.0]);
    let x = geometry::project_cone_constraint(&a, 1.0, 0.5, &DVector::from_vec(vec![3.0, 0.0]), 1e-12)?;
    println!("\ncone a=(1,0) b=1 r=0.5, z=(3,0) -> {:?}", x.as_slice());

    let truth = Polytope::bounding_box(&[-1.0, -1.0], &[1.0, 1.0]);
    let a_hat = truth.a() + DMatrix::from_fn(4, 2, |i, j| 0.02 * ((i + 2 * j) as f64).sin());
    let z = DVector::from_vec(vec![2.0, 1.5]);
    println!("\nrobust box, z = {:?}", z.as_slice());
    for radius in [0.0, 0.05, 0.2] {
        for mode in [ProjectionMode::ExactCone, ProjectionMode::Conservative] {
            let set = RobustSafeSet { a_hat: a_hat.clone(), b: truth.b().clone(), radius, mode, norm_bound: truth.norm_bound() };
            let p = geometry::project_robust_set(&set, &z, tol, iters)?;
            println!(
                "r={radius:<5} {mode:?}: {:?}  true slack {:.4}",
                p.as_slice().iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
                truth.min_slack(&p)
            );
        }
    }

    let shrunk = geometry::shrink_polytope(&truth, 0.3, None)?;
    println!("\nbox shrunk by 0.3 has vertices {:?}", shrunk.vertices().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>());
    println!("shrinking by 1.5 fails: {}", geometry::shrink_polytope(&truth, 1.5, None).unwrap_err());
    Ok(())
}
