//! CSV/JSON artifacts and the sha256 manifest. Floats are written with
//! Rust's shortest round-trip formatting, so reading a file back gives the
//! exact same bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::hex;
use super::{HarnessError, PipelineOutput, Prepared, RunSummary, SeedOutcome};
use crate::losses::{MinimizerTrace, ShrunkComparator};
use crate::network;
use crate::optimizer::{Phase, RunRecord};

const MIXING_TRACE_ROUNDS: usize = 30;

fn indexed(prefix: &str, d: usize) -> String {
    (0..d).map(|j| format!(",{prefix}_{j}")).collect()
}

pub fn run_csv(record: &RunRecord) -> String {
    let mut s = String::with_capacity(record.horizon() * record.m * 64);
    s.push_str("t,agent,phase");
    s.push_str(&indexed("x", record.d));
    s.push_str(",local_loss,global_loss,feasible_true,disagreement");
    if record.deviation.is_some() {
        s.push_str(",deviation_omd");
    }
    s.push('\n');
    for t in 0..record.horizon() {
        let phase = record.schedule.phase(t);
        for i in 0..record.m {
            let _ = write!(s, "{},{},{}", t + 1, i, phase);
            let o = (t * record.m + i) * record.d;
            for v in &record.actions[o..o + record.d] {
                let _ = write!(s, ",{v}");
            }
            let _ = write!(
                s,
                ",{},{},{},{}",
                record.local_loss(t, i),
                record.global_loss(t, i),
                u8::from(record.is_feasible(t, i)),
                record.disagreement[t]
            );
            if let Some(dv) = record.deviation_at(t, i) {
                let _ = write!(s, ",{dv}");
            }
            s.push('\n');
        }
    }
    s
}

pub fn trace_csv(trace: &MinimizerTrace) -> String {
    let d = trace.x_star.first().map_or(0, |x| x.len());
    let mut s = format!("t{},f_star,path_length_cum", indexed("x_star", d));
    if trace.shrunk.is_some() {
        s.push_str(&indexed("x_tilde", d));
        s.push_str(",f_tilde");
    }
    s.push('\n');
    let cum = trace.cumulative_path();
    for t in 0..trace.horizon() {
        let _ = write!(s, "{}", t + 1);
        for v in trace.x_star[t].iter() {
            let _ = write!(s, ",{v}");
        }
        let _ = write!(s, ",{},{}", trace.optimal_values[t], cum[t]);
        if let Some(sh) = &trace.shrunk {
            for v in sh.points[t].iter() {
                let _ = write!(s, ",{v}");
            }
            let _ = write!(s, ",{}", sh.values[t]);
        }
        s.push('\n');
    }
    s
}

fn estimation_csv(run: &PipelineOutput) -> String {
    let e = &run.estimation;
    let mut s = String::from("agent,radius,max_row_error,ridge_error,contained,t0,t1\n");
    for a in &e.agents {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.agent,
            e.radius,
            a.max_row_error,
            a.ridge_error,
            u8::from(a.contained),
            e.t0,
            e.t1
        );
    }
    s
}

fn extra_csv(run: &PipelineOutput) -> String {
    let mut s = String::from("iteration,agent,error_to_ridge,pairwise_disagreement\n");
    for r in &run.estimation.extra_trace {
        let err = r.error_to_oracle.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(s, "{},{},{},{}", r.iteration, r.agent, err, r.pairwise_disagreement);
    }
    s
}

fn mixing_csv(prep: &Prepared) -> String {
    let mut s = String::from("k,agent,deviation,bound\n");
    for (k, i, dev, bound) in network::mixing_trace(&prep.topology, MIXING_TRACE_ROUNDS) {
        let _ = writeln!(s, "{k},{i},{dev},{bound}");
    }
    s
}

fn projections_csv(record: &RunRecord) -> String {
    let mut s = String::from("t,agent,iterations,residual\n");
    for p in &record.projections {
        let _ = writeln!(s, "{},{},{},{}", p.t + 1, p.agent, p.iterations, p.residual);
    }
    s
}

/// Hash manifest of a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub files: BTreeMap<String, String>,
    /// SHA-256 over the sorted `name:hash` lines.
    pub fingerprint: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn fingerprint(files: &BTreeMap<String, String>) -> String {
    let joined: String = files.iter().map(|(k, v)| format!("{k}:{v}\n")).collect();
    sha256_hex(joined.as_bytes())
}

/// Writes every artifact of one seed into `dir`.
pub fn write_run_dir(
    dir: &Path,
    prep: &Prepared,
    run: &PipelineOutput,
    summary: &RunSummary,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(&str, String)> = vec![
        ("run.csv", run_csv(&run.record)),
        ("trace.csv", trace_csv(&run.trace)),
        ("estimation.csv", estimation_csv(run)),
        ("extra.csv", extra_csv(run)),
        ("mixing.csv", mixing_csv(prep)),
        ("summary.json", serde_json::to_string_pretty(summary).expect("summary serialises") + "\n"),
    ];
    if !run.record.projections.is_empty() {
        files.push(("projections.csv", projections_csv(&run.record)));
    }
    let mut hashes = BTreeMap::new();
    for (name, body) in &files {
        fs::write(dir.join(name), body)?;
        hashes.insert(name.to_string(), sha256_hex(body.as_bytes()));
    }
    let manifest = Manifest {
        config_sha256: summary.config_sha256.clone(),
        seed: summary.seed,
        fingerprint: fingerprint(&hashes),
        files: hashes,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest") + "\n")?;
    Ok(())
}

pub fn write_experiment_summary(path: &Path, outcomes: &[SeedOutcome]) -> Result<(), HarnessError> {
    let mut s = String::from(
        "seed,mode,mean_regret,path_length,violations,worst_slack,containment,radius,max_disagreement\n",
    );
    for o in outcomes {
        let r = &o.summary;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.mode,
            r.mean_regret,
            r.path_length,
            r.violations,
            r.worst_slack,
            u8::from(r.containment),
            r.radius,
            r.max_disagreement
        );
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<RunSummary, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))
}

fn malformed(path: &Path, line: usize, what: &str) -> HarnessError {
    HarnessError::Malformed(format!("{}:{}: {what}", path.display(), line + 1))
}

fn parse_f64(field: Option<&str>, path: &Path, line: usize) -> Result<f64, HarnessError> {
    field
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(path, line, "expected a number"))
}

/// Reads `run.csv` back into a record, using the summary for the shape.
pub fn read_run_csv(path: &Path, summary: &RunSummary) -> Result<RunRecord, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(path, 0, "empty file"))?;
    let has_dev = header.ends_with(",deviation_omd");
    let (m, d, horizon) = (summary.m, summary.d, summary.horizon);
    let mut rec = RunRecord {
        mode: summary.mode,
        m,
        d,
        schedule: summary.schedule,
        actions: Vec::with_capacity(horizon * m * d),
        local_losses: Vec::with_capacity(horizon * m),
        global_losses: Vec::with_capacity(horizon * m),
        feasible: Vec::with_capacity(horizon * m),
        disagreement: Vec::with_capacity(horizon),
        deviation: has_dev.then(Vec::new),
        projections: Vec::new(),
        radii: Vec::new(),
        shared_owner: summary.shared_owner,
    };
    for (n, line) in lines.enumerate() {
        let row = n + 1;
        let mut f = line.split(',');
        let t: usize = f.next().and_then(|v| v.parse().ok()).ok_or_else(|| malformed(path, row, "bad round"))?;
        let i: usize = f.next().and_then(|v| v.parse().ok()).ok_or_else(|| malformed(path, row, "bad agent"))?;
        if t != n / m + 1 || i != n % m {
            return Err(malformed(path, row, "rows out of order"));
        }
        f.next()
            .and_then(|p| p.parse::<Phase>().ok())
            .ok_or_else(|| malformed(path, row, "bad phase"))?;
        for _ in 0..d {
            rec.actions.push(parse_f64(f.next(), path, row)?);
        }
        rec.local_losses.push(parse_f64(f.next(), path, row)?);
        rec.global_losses.push(parse_f64(f.next(), path, row)?);
        rec.feasible.push(f.next() == Some("1"));
        let dis = parse_f64(f.next(), path, row)?;
        if i == 0 {
            rec.disagreement.push(dis);
        }
        if let Some(dev) = rec.deviation.as_mut() {
            dev.push(parse_f64(f.next(), path, row)?);
        }
    }
    if rec.global_losses.len() != horizon * m {
        return Err(HarnessError::HorizonMismatch { record: rec.global_losses.len() / m.max(1), trace: horizon });
    }
    Ok(rec)
}

pub fn read_trace_csv(path: &Path, d: usize) -> Result<MinimizerTrace, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed(path, 0, "empty file"))?;
    let shrunk = header.ends_with(",f_tilde");
    let (mut xs, mut vals, mut pts, mut tvals) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        let row = n + 1;
        let nums: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| malformed(path, row, "expected a number")))
            .collect::<Result<_, _>>()?;
        let expected = 1 + d + 2 + if shrunk { d + 1 } else { 0 };
        if nums.len() != expected {
            return Err(malformed(path, row, "wrong column count"));
        }
        xs.push(DVector::from_column_slice(&nums[1..1 + d]));
        vals.push(nums[1 + d]);
        if shrunk {
            pts.push(DVector::from_column_slice(&nums[3 + d..3 + 2 * d]));
            tvals.push(nums[3 + 2 * d]);
        }
    }
    let mut trace = MinimizerTrace::from_points(xs, vals);
    if shrunk {
        trace.shrunk = Some(ShrunkComparator { tau_in: f64::NAN, points: pts, values: tvals });
    }
    Ok(trace)
}

/// Recomputes every file hash listed in `manifest.json`.
pub fn verify_manifest(dir: &Path) -> Result<bool, HarnessError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| HarnessError::Malformed(format!("{}: {e}", path.display())))?;
    for (name, hash) in &manifest.files {
        let body = fs::read(dir.join(name))?;
        if &sha256_hex(&body) != hash {
            return Ok(false);
        }
    }
    Ok(fingerprint(&manifest.files) == manifest.fingerprint)
}
