//! Learning the constraint matrix: safe exploration around the baseline,
//! decentralized ridge regression with EXTRA, and the confidence radius,
//! checked against the hidden truth over many seeds.
//!
//! cargo run --release --example constraint_estimation

use dsafe::estimation;
use dsafe::harness::{self, ExperimentConfig};

const CONFIG: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "convex_tracking", "d": 3, "m": 5, "T": 8000,
                 "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}, "baseline": [0, 0, 0]},
    "topology": {"kind": "path"},
    "estimation": {"R": 0.1, "lambda": 0.01, "delta": 0.05},
    "seeds": [1]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prep = ExperimentConfig::from_json(CONFIG)?.prepare()?;
    let out = harness::run_estimation(&prep, 1)?;
    println!("gamma {:.4}, sigma_zeta {:.4}", prep.gamma, prep.sigma_zeta);
    println!("T0 {} (high-probability requirement {}), T1 {}, alpha {:.3e}", out.t0, out.required_t0, out.t1, out.alpha);
    let ridge = estimation::centralized_ridge(&out.log, prep.config.estimation.lambda)?;
    println!("EXTRA vs centralized ridge: max error {:.2e}, pairwise {:.2e}", out.max_ridge_error(), out.max_pairwise);
    println!("ridge row error {:.4}, radius B_r {:.4}", estimation::max_row_error(&ridge, prep.truth.a()), out.radius);
    for a in &out.agents {
        println!("  agent {}: max row error {:.4}  contained {}", a.agent, a.max_row_error, a.contained);
    }

    let seeds = 100;
    let held = (0..seeds)
        .filter(|&s| harness::run_estimation(&prep, s).map(|o| o.containment()).unwrap_or(false))
        .count();
    println!("\ncontainment held in {held}/{seeds} seeds");
    Ok(())
}
