//! Non-convex losses `f(x) = ½‖x²/4 − ψ‖²` on a positive box: one full run
//! in the shared-set mode with the shadow mirror descent attached, then a
//! step-size sweep of the OGD/OMD deviation.
//!
//! cargo run --release --example nonconvex_mirror

use dsafe::harness::{self, ExperimentConfig};

const CONFIG: &str = r#"{
    "schema_version": 1,
    "scenario": {
        "kind": "nonconvex_reparameterized",
        "d": 2, "m": 6, "T": 4000,
        "box": {"lo": [0.5, 0.5], "hi": [1.5, 1.5]},
        "baseline": [1.0, 1.0],
        "margin": 0.1, "spread": 0.1,
        "drift": {"type": "random_walk", "step": 0.0005}
    },
    "topology": {"kind": "ring"},
    "schedule": {"shadow_omd": true},
    "seeds": [11]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prep = ExperimentConfig::from_json(CONFIG)?.prepare()?;
    let run = harness::run_pipeline(&prep, 11)?;
    let c = &run.losses.constants;
    println!("beta {:.4}, D_G {}", prep.topology.beta(), prep.topology.diameter());
    println!(
        "G {:.4}, G_F {:.4}, W {:.4}, D' {:.4}",
        c.gradient_bound,
        c.mirror_gradient_bound.unwrap_or(f64::NAN),
        c.q_lipschitz.unwrap_or(f64::NAN),
        c.bregman_diameter.unwrap_or(f64::NAN)
    );
    let s = &run.record.schedule;
    println!("T0 {}, T1 {}, D_G {}, eta {:.5}, B_r {:.4}", s.t0, s.t1, s.consensus_rounds, s.eta, run.estimation.radius);
    println!("shared estimate owner: agent {}", run.record.shared_owner.unwrap_or(0));
    println!(
        "mean regret {:.3}, C_T* {:.4}, violations {}",
        run.regret.mean_regret(),
        run.trace.path_length,
        run.audit.violations
    );
    println!(
        "max disagreement {:.3e} <= bound {:.3e}",
        run.record.max_disagreement(),
        run.disagreement_bound.unwrap_or(f64::INFINITY)
    );
    println!("max one-step OGD/OMD deviation {:.3e}", run.record.max_deviation().unwrap_or(0.0));

    let etas = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let sweep = harness::deviation_sweep(&prep, 11, &etas, 400)?;
    println!("\n{:>10} {:>14}", "eta", "max deviation");
    for (eta, dev) in sweep.etas.iter().zip(&sweep.max_deviation) {
        println!("{eta:>10} {dev:>14.6e}");
    }
    if let Some(f) = sweep.fit {
        println!("log-log slope {:.3} (95% CI {:.3}..{:.3})", f.slope, f.ci_low, f.ci_high);
    }
    Ok(())
}
