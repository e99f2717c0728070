//! One end-to-end convex run: a drifting quadratic target, every agent
//! projecting onto its own robust safe set, with the regret decomposition
//! and the safety audit.
//!
//! cargo run --release --example convex_tracking

use dsafe::harness::{self, ExperimentConfig};
use dsafe::optimizer::Phase;

const CONFIG: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "convex_tracking", "d": 2, "m": 8, "T": 8000,
                 "polytope": {"A": [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]], "b": [1, 1, 1, 1, 1.2]},
                 "baseline": [0, 0],
                 "drift": {"type": "random_walk", "step": 0.002}},
    "topology": {"kind": "ring"},
    "estimation": {"projection_mode": "exact_cone"},
    "seeds": [3]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prep = ExperimentConfig::from_json(CONFIG)?.prepare()?;
    let run = harness::run_pipeline(&prep, 3)?;
    let s = run.record.schedule;
    println!("T0 {}, T1 {}, eta {:.4}, B_r {:.4}, beta {:.4}", s.t0, s.t1, s.eta, run.estimation.radius, prep.topology.beta());
    println!("C_T* {:.3}", run.trace.path_length);
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "agent", "regret", "term I", "term II", "term III");
    for a in &run.regret.agents {
        println!("{:>5} {:>10.3} {:>10.3} {:>10.3} {:>10.3}", a.agent, a.total, a.term_i, a.term_ii, a.term_iii);
    }
    println!("decomposition residual {:.1e}", run.regret.max_decomposition_residual());
    println!("violations {}, worst true slack {:.4}", run.audit.violations, run.audit.worst_slack);
    println!("max disagreement {:.3e}, fitted kappa {:.3}", run.record.max_disagreement(), run.kappa.unwrap_or(f64::NAN));

    let t = s.horizon - 1;
    let x_star = &run.trace.x_star[t];
    println!("\nlast round ({}): x* = {:?}", Phase::Optimize, x_star.as_slice());
    for i in 0..run.record.m.min(3) {
        println!("  agent {i} plays {:?}", run.record.action(t, i).as_slice());
    }
    Ok(())
}
