use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsafe::harness::{self, ExperimentConfig, ExperimentOptions, HarnessError};
use dsafe::optimizer::Mode;

#[derive(Parser)]
#[command(name = "dsafe", about = "Safe distributed online optimisation experiments")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a config and write the artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        trace_projections: bool,
    },
    /// Regret scaling study over several horizons.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Recompute safety and regret from a run directory.
    Audit {
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, HarnessError> {
    match cli.command {
        Command::Run { config, seed, out, mode, trace_projections } => {
            let cfg = ExperimentConfig::load(&config)?;
            let opts = ExperimentOptions {
                threads: cli.threads,
                seeds: seed.map(|s| vec![s]),
                output: out,
                mode,
                trace_projections,
            };
            let outcomes = harness::run_experiment(&cfg, &opts)?;
            let mut violations = 0;
            for o in &outcomes {
                let s = &o.summary;
                println!(
                    "seed {}: mean regret {:.6}, C_T* {:.6}, violations {}, max disagreement {:.3e}, containment {} -> {}",
                    s.seed,
                    s.mean_regret,
                    s.path_length,
                    s.violations,
                    s.max_disagreement,
                    s.containment,
                    o.dir.display()
                );
                violations += s.violations;
            }
            Ok(if violations > 0 { 4 } else { 0 })
        }
        Command::Study { config, horizons, repeats } => {
            let cfg = ExperimentConfig::load(&config)?;
            let study = harness::scaling_study(&cfg, &horizons, repeats, cli.threads)?;
            println!("T,runs,mean_regret,std_regret,mean_term_i,mean_path_length,violations,containment_runs");
            for r in &study.rows {
                println!(
                    "{},{},{},{},{},{},{},{}",
                    r.horizon,
                    r.runs,
                    r.mean_regret,
                    r.std_regret,
                    r.mean_term_i,
                    r.mean_path_length,
                    r.violations,
                    r.containment_runs
                );
            }
            if let Some(f) = study.fit {
                println!("regret exponent {:.4} (95% CI {:.4}..{:.4})", f.slope, f.ci_low, f.ci_high);
            }
            if let Some(f) = study.term_i_fit {
                println!("pre-optimisation regret exponent {:.4}", f.slope);
            }
            let violations: usize = study.rows.iter().map(|r| r.violations).sum();
            Ok(if violations > 0 { 4 } else { 0 })
        }
        Command::Audit { run } => {
            let report = harness::audit_run_dir(&run)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
            if !report.manifest_ok || !report.regret_reproduced {
                return Err(HarnessError::Malformed("artifacts do not reproduce the stored summary".into()));
            }
            Ok(if report.violations > 0 { 4 } else { 0 })
        }
    }
}
