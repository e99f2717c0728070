//! Writes a run to disk, re-audits it from the CSVs, and checks that a
//! second run with a different thread count produces identical bytes.
//!
//! cargo run --release --example audit_roundtrip

use dsafe::harness::{self, ExperimentConfig, ExperimentOptions};

const CONFIG: &str = r#"{
    "schema_version": 1,
    "scenario": {"kind": "convex_tracking", "d": 2, "m": 4, "T": 2000,
                 "box": {"lo": [-1, -1], "hi": [1, 1]}, "baseline": [0, 0]},
    "topology": {"kind": "star"},
    "seeds": [5, 6]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let root = tempfile::tempdir()?;
    let mut dirs = Vec::new();
    for threads in [1, 8] {
        let out = root.path().join(format!("threads_{threads}"));
        let opts = ExperimentOptions { threads: Some(threads), output: Some(out.clone()), ..Default::default() };
        harness::run_experiment(&cfg, &opts)?;
        dirs.push(out);
    }
    let report = harness::audit_run_dir(&dirs[0].join("seed_5"))?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    for seed in [5, 6] {
        for file in ["run.csv", "trace.csv", "estimation.csv", "summary.json", "manifest.json"] {
            let a = std::fs::read(dirs[0].join(format!("seed_{seed}")).join(file))?;
            let b = std::fs::read(dirs[1].join(format!("seed_{seed}")).join(file))?;
            println!("seed {seed} {file:<15} identical across 1 and 8 threads: {}", a == b);
        }
    }
    Ok(())
}
