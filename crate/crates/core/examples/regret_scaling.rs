//! Regret against the horizon, with and without a drifting comparator.
//! Pass `full` for the complete T = 2000..32000 x 10 seeds study.
//!
//! cargo run --release --example regret_scaling [full]

use dsafe::harness::{self, ExperimentConfig};
use dsafe::losses::Drift;

const CONFIG: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "convex_tracking", "d": 2, "m": 4, "T": 2000,
                 "box": {"lo": [-1, -1], "hi": [1, 1]}, "baseline": [0, 0]},
    "topology": {"kind": "ring"},
    "seeds": [1]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let full = std::env::args().any(|a| a == "full");
    let (horizons, repeats): (Vec<usize>, usize) =
        if full { (vec![2000, 4000, 8000, 16000, 32000], 10) } else { (vec![1000, 2000, 4000, 8000], 3) };
    let base = ExperimentConfig::from_json(CONFIG)?;
    let mut drifting = base.clone();
    drifting.scenario.drift = Drift::RandomWalk { step: 0.05 };

    for (name, cfg) in [("static", &base), ("random walk", &drifting)] {
        let study = harness::scaling_study(cfg, &horizons, repeats, None)?;
        println!("{name}:");
        println!("{:>7} {:>12} {:>12} {:>10}", "T", "regret", "pre-opt", "C_T*");
        for r in &study.rows {
            println!("{:>7} {:>12.2} {:>12.2} {:>10.3}", r.horizon, r.mean_regret, r.mean_term_i, r.mean_path_length);
        }
        if let Some(f) = study.fit {
            println!("exponent {:.3} (95% CI {:.3}..{:.3})\n", f.slope, f.ci_low, f.ci_high);
        }
    }
    Ok(())
}
