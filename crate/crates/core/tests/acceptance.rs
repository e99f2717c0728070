//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::path::Path;
use std::time::Instant;

use common::{gaussian_vec, random_connected_mixing, random_polytope, rng};
use dsafe::estimation;
use dsafe::geometry::{self, ProjectionMode, RobustSafeSet};
use dsafe::harness::{self, ExperimentConfig, ExperimentOptions, PipelineOutput, Prepared};
use dsafe::losses::Drift;
use dsafe::network::{self, TopologyKind};
use rand::Rng;
use rayon::prelude::*;

const CONVEX_SUITE: [&str; 4] = [
    r#"{"schema_version": 1,
        "scenario": {"kind": "convex_tracking", "d": 2, "m": 4, "T": 2000,
                     "box": {"lo": [-1, -1], "hi": [1, 1]}, "baseline": [0, 0]},
        "topology": {"kind": "ring"}, "seeds": [1]}"#,
    r#"{"schema_version": 1,
        "scenario": {"kind": "convex_tracking", "d": 3, "m": 8, "T": 2000,
                     "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}, "baseline": [0, 0, 0],
                     "drift": {"type": "random_walk", "step": 0.01}},
        "topology": {"kind": "complete"}, "seeds": [1]}"#,
    r#"{"schema_version": 1,
        "scenario": {"kind": "convex_tracking", "d": 2, "m": 6, "T": 2000,
                     "polytope": {"A": [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]], "b": [1, 1, 1, 1, 1.2]},
                     "baseline": [0, 0], "start": [-0.3, 0],
                     "drift": {"type": "switching", "switch_every": 500, "amplitude": 0.5}},
        "topology": {"kind": "star"},
        "estimation": {"projection_mode": "exact_cone"}, "seeds": [1]}"#,
    r#"{"schema_version": 1,
        "scenario": {"kind": "convex_tracking", "d": 2, "m": 5, "T": 2000,
                     "box": {"lo": [-1, -0.5], "hi": [1, 1.5]}, "baseline": [0, 0.5]},
        "topology": {"kind": "path"}, "seeds": [1]}"#,
];

const NONCONVEX_SUITE: [&str; 2] = [
    r#"{"schema_version": 1,
        "scenario": {"kind": "nonconvex_reparameterized", "d": 2, "m": 4, "T": 2000,
                     "box": {"lo": [0.5, 0.5], "hi": [1.5, 1.5]}, "baseline": [1, 1],
                     "margin": 0.1, "spread": 0.1},
        "topology": {"kind": "ring"}, "schedule": {"shadow_omd": true}, "seeds": [1]}"#,
    r#"{"schema_version": 1,
        "scenario": {"kind": "nonconvex_reparameterized", "d": 3, "m": 6, "T": 2000,
                     "box": {"lo": [0.5, 0.5, 0.5], "hi": [1.5, 1.5, 1.5]}, "baseline": [1, 1, 1],
                     "margin": 0.1, "spread": 0.1, "drift": {"type": "random_walk", "step": 0.001}},
        "topology": {"kind": "star"}, "seeds": [1]}"#,
];

const STATIC_STUDY: &str = r#"{"schema_version": 1,
    "scenario": {"kind": "convex_tracking", "d": 2, "m": 4, "T": 2000,
                 "box": {"lo": [-1, -1], "hi": [1, 1]}, "baseline": [0, 0]},
    "topology": {"kind": "ring"}, "seeds": [1]}"#;

const TOL: f64 = geometry::DEFAULT_TOL;
const ITERS: usize = geometry::DEFAULT_MAX_ITER;

fn prep(text: &str) -> Prepared {
    ExperimentConfig::from_json(text).expect("suite config parses").prepare().expect("suite config prepares")
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// The seeded suite shared by criteria 1, 6 and 9: 20 convex and 20 non-convex runs.
fn suite() -> Vec<PipelineOutput> {
    let mut jobs = Vec::new();
    for k in 0..20u64 {
        jobs.push((CONVEX_SUITE[k as usize % 4], 100 + k));
        jobs.push((NONCONVEX_SUITE[k as usize % 2], 200 + k));
    }
    jobs.par_iter().map(|(text, seed)| harness::run_pipeline(&prep(text), *seed).expect("suite run")).collect()
}

fn criterion_1(runs: &[PipelineOutput]) -> Verdict {
    let contained: Vec<_> = runs.iter().filter(|r| r.estimation.containment()).collect();
    let bad = contained.iter().filter(|r| r.audit.violations > 0).count();
    let total_violations: usize = runs.iter().map(|r| r.audit.violations).sum();
    let rate = contained.len() as f64 / runs.len() as f64;
    verdict(
        bad == 0 && rate >= 0.9,
        format!(
            "{} runs, {} contained ({:.0}%), {} contained runs with violations, {} violations overall",
            runs.len(),
            contained.len(),
            100.0 * rate,
            bad,
            total_violations
        ),
    )
}

fn criterion_2() -> Verdict {
    let jobs: Vec<(&str, u64)> =
        (0..200u64).map(|k| if k % 2 == 0 { (CONVEX_SUITE[0], 1000 + k) } else { (NONCONVEX_SUITE[0], 1000 + k) }).collect();
    let hits: usize = jobs
        .par_iter()
        .map(|(text, seed)| usize::from(harness::run_estimation(&prep(text), *seed).expect("estimation").containment()))
        .sum();
    let rate = hits as f64 / 200.0;
    verdict(rate >= 0.9, format!("containment in {hits}/200 runs ({:.1}%)", 100.0 * rate))
}

fn criterion_3() -> Verdict {
    let mut worst_ridge = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for text in CONVEX_SUITE.iter().chain(&NONCONVEX_SUITE) {
        let p = prep(text);
        let e = &p.config.estimation;
        let out = harness::run_estimation(&p, 1).expect("estimation");
        let bound = 2.0 * (p.config.scenario.horizon as f64).powf(-e.rho);
        worst_ratio = worst_ratio.max(out.max_pairwise / bound);
        let t1 = estimation::calibrate_t1(&out.log, &p.topology, out.alpha, e.lambda, 1, 1e-7, 400_000).expect("calibration");
        let a_hats = estimation::extra_solve(&out.log, &p.topology, out.alpha, t1, e.lambda, 1).expect("extra");
        let ridge = estimation::centralized_ridge(&out.log, e.lambda).expect("ridge");
        for a in &a_hats {
            worst_ridge = worst_ridge.max((a - &ridge).norm());
        }
    }
    verdict(
        worst_ridge <= 1e-5 && worst_ratio <= 1.0,
        format!("max |A_i - ridge|_F {worst_ridge:.2e} (<= 1e-5), max pairwise / (2 T^-rho) {worst_ratio:.3}"),
    )
}

fn criterion_4() -> Verdict {
    let results: Vec<(f64, f64, f64, f64)> = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(7_000 + k);
            let d = r.random_range(2..=5);
            let cuts = r.random_range(1..=3);
            let (poly, _) = random_polytope(&mut r, d, cuts);
            let z1 = gaussian_vec(&mut r, d, 4.0);
            let z2 = gaussian_vec(&mut r, d, 4.0);
            let p1 = geometry::project_polytope(&poly, &z1, TOL, ITERS).expect("projection");
            let p2 = geometry::project_polytope(&poly, &z2, TOL, ITERS).expect("projection");
            let kkt = geometry::kkt_residual(&poly, &z1, &p1, 1e-7);
            let idem = (geometry::project_polytope(&poly, &p1, TOL, ITERS).expect("projection") - &p1).norm();
            let expansion = (&p1 - &p2).norm() - (&z1 - &z2).norm();
            let set = RobustSafeSet {
                a_hat: poly.a().clone(),
                b: poly.b().clone(),
                radius: 0.0,
                mode: if k % 2 == 0 { ProjectionMode::ExactCone } else { ProjectionMode::Conservative },
                norm_bound: poly.norm_bound(),
            };
            let robust = (geometry::project_robust_set(&set, &z1, TOL, ITERS).expect("projection") - &p1).norm();
            (kkt, idem, expansion, robust)
        })
        .collect();
    let max = |f: fn(&(f64, f64, f64, f64)) -> f64| results.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (kkt, idem, exp, robust) = (max(|r| r.0), max(|r| r.1), max(|r| r.2), max(|r| r.3));
    verdict(
        kkt <= 1e-6 && idem <= 1e-8 && exp <= 1e-8 && robust <= 1e-8,
        format!("1000 checks: max KKT {kkt:.1e}, idempotence {idem:.1e}, expansion {exp:.1e}, radius-0 gap {robust:.1e}"),
    )
}

fn criterion_5() -> Verdict {
    let mut family = Vec::new();
    for kind in [TopologyKind::Complete, TopologyKind::Ring, TopologyKind::Path, TopologyKind::Star] {
        for m in 1..=16 {
            family.push(network::generate(kind, m).expect("topology"));
        }
    }
    for k in 0..20u64 {
        let mut r = rng(9_000 + k);
        let m = r.random_range(2..=16);
        family.push(network::validate_topology(&random_connected_mixing(&mut r, m)).expect("topology"));
    }
    let mut worst = f64::NEG_INFINITY;
    for top in &family {
        for k in 1..=30 {
            let bound = network::mixing_bound(top, k);
            for i in 0..top.agents() {
                worst = worst.max(network::mixing_error(top, k, i) - bound);
            }
        }
    }
    verdict(worst <= 1e-12, format!("{} topologies, k = 1..30, max excess over sqrt(m) beta^k {worst:.1e}", family.len()))
}

fn criterion_6(runs: &[PipelineOutput]) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for r in runs.iter().filter(|r| r.disagreement_bound.is_some()) {
        count += 1;
        worst = worst.max(r.record.max_disagreement() - r.disagreement_bound.unwrap_or(0.0));
    }
    verdict(count > 0 && worst <= 10.0 * TOL, format!("{count} shared-set runs, max (disagreement - bound) {worst:.2e}"))
}

fn criterion_7() -> Verdict {
    let base = ExperimentConfig::from_json(STATIC_STUDY).expect("study config");
    let horizons = [2000, 4000, 8000, 16000, 32000];
    let stat = harness::scaling_study(&base, &horizons, 10, None).expect("static study");
    let mut drifting = base.clone();
    drifting.scenario.drift = Drift::RandomWalk { step: 0.05 };
    let drift = harness::scaling_study(&drifting, &horizons, 10, None).expect("drift study");
    let (Some(fs), Some(fd)) = (stat.fit, drift.fit) else {
        return verdict(false, "no fit");
    };
    let above = stat.rows.iter().zip(&drift.rows).all(|(s, d)| d.mean_regret > s.mean_regret);
    let violations: usize = stat.rows.iter().chain(&drift.rows).map(|r| r.violations).sum();
    verdict(
        (0.55..=0.85).contains(&fs.slope) && above && fd.slope <= 1.05 && violations == 0,
        format!(
            "static exponent {:.3} (CI {:.3}..{:.3}), drifting exponent {:.3}, drifting above static at every T: {above}, violations {violations}",
            fs.slope, fs.ci_low, fs.ci_high, fd.slope
        ),
    )
}

fn criterion_8() -> Verdict {
    let p = prep(NONCONVEX_SUITE[0]);
    let sweep = harness::deviation_sweep(&p, 1, &[1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4], 400).expect("sweep");
    match sweep.fit {
        Some(f) => verdict(f.slope >= 1.4, format!("deviation slope {:.3} (CI {:.3}..{:.3})", f.slope, f.ci_low, f.ci_high)),
        None => verdict(false, "no fit"),
    }
}

fn criterion_9(runs: &[PipelineOutput]) -> Verdict {
    let worst = runs.iter().map(|r| r.regret.max_decomposition_residual()).fold(0.0, f64::max);
    verdict(worst <= 1e-8, format!("max |I + II + III - total| {worst:.2e} over {} runs", runs.len()))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).expect("read dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("prefix").display().to_string();
                out.push((rel, std::fs::read(&path).expect("read")));
            }
        }
    }
    out.sort();
    out
}

fn criterion_10() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut same = true;
    let mut files = 0;
    for (k, text) in [CONVEX_SUITE[2], NONCONVEX_SUITE[0]].iter().enumerate() {
        let mut cfg = ExperimentConfig::from_json(text).expect("config");
        cfg.seeds = vec![1, 2, 3];
        let dir = tmp.path().join(format!("c{k}"));
        let mut snaps = Vec::new();
        for threads in [1, 8] {
            let opts = ExperimentOptions { threads: Some(threads), output: Some(dir.clone()), ..Default::default() };
            harness::run_experiment(&cfg, &opts).expect("experiment");
            snaps.push(snapshot(&dir));
        }
        files += snaps[0].len();
        same &= !snaps[0].is_empty() && snaps[0] == snaps[1];
    }
    verdict(same, format!("{files} artifact files compared between 1 and 8 threads, identical: {same}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, v: Verdict, started: Instant| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("criterion {n:>2}: {tag}  {} [{:.1}s]", v.detail, started.elapsed().as_secs_f64());
    };
    let t = Instant::now();
    let runs = suite();
    let suite_time = t.elapsed().as_secs_f64();
    println!("suite of {} runs built in {suite_time:.1}s", runs.len());
    report(1, criterion_1(&runs), t);
    let t = Instant::now();
    report(2, criterion_2(), t);
    let t = Instant::now();
    report(3, criterion_3(), t);
    let t = Instant::now();
    report(4, criterion_4(), t);
    let t = Instant::now();
    report(5, criterion_5(), t);
    let t = Instant::now();
    report(6, criterion_6(&runs), t);
    let t = Instant::now();
    report(7, criterion_7(), t);
    let t = Instant::now();
    report(8, criterion_8(), t);
    let t = Instant::now();
    report(9, criterion_9(&runs), t);
    let t = Instant::now();
    report(10, criterion_10(), t);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
