//! Experiment orchestration: configuration, the seeded end-to-end pipeline,
//! metrics, scaling studies and on-disk artifacts.

pub mod config;
pub mod io;
pub mod metrics;

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ExperimentConfig, Prepared};
pub use metrics::{compute_regret, fit_power_law, safety_audit, PowerFit, RegretReport, SafetyAudit};

use crate::estimation::{
    self, EstimationError, ExplorationConfig, ExplorationLog, ExtraTraceRow, Provenance, RadiusInputs,
    SafeSetEstimate,
};
use crate::geometry::{self, GeometryError, Polytope};
use crate::losses::{self, FamilyParams, LossConstants, LossError, LossKind, LossSequence, MinimizerTrace};
use crate::optimizer::{self, Mode, OptimizerError, RunOptions, RunRecord, Schedule, Scenario, ShadowOptions};
use crate::rng::{self, Purpose};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{phase}: {message}")]
    Runtime { phase: &'static str, message: String, divergence: bool },
    #[error("horizon mismatch: record has {record} rounds, trace has {trace}")]
    HorizonMismatch { record: usize, trace: usize },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed run directory: {0}")]
    Malformed(String),
}

impl HarnessError {
    /// Process exit code: 2 config, 3 divergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime { divergence: true, .. } => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn in_phase<E: std::fmt::Display>(phase: &'static str) -> impl Fn(E) -> HarnessError {
    move |e| HarnessError::Runtime { phase, message: e.to_string(), divergence: false }
}

fn estimation_failure(phase: &'static str) -> impl Fn(EstimationError) -> HarnessError {
    move |e| {
        let divergence =
            matches!(e, EstimationError::DivergenceDetected { .. } | EstimationError::CalibrationFailed { .. });
        HarnessError::Runtime { phase, message: e.to_string(), divergence }
    }
}

fn optimizer_failure(e: OptimizerError) -> HarnessError {
    match e {
        OptimizerError::Estimation(inner) => estimation_failure("optimize")(inner),
        other => in_phase("optimize")(other),
    }
}

/// Per-agent estimation outcome, audited against the hidden truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentEstimate {
    pub agent: usize,
    /// `max_k ‖â_k − a_k‖`.
    pub max_row_error: f64,
    /// `‖Â_i − Â_ridge‖_F`.
    pub ridge_error: f64,
    pub contained: bool,
}

#[derive(Debug, Clone)]
pub struct EstimationOutcome {
    pub log: ExplorationLog,
    pub estimates: Vec<SafeSetEstimate>,
    pub t0: usize,
    pub t1: usize,
    pub required_t0: usize,
    pub alpha: f64,
    pub radius: f64,
    pub agents: Vec<AgentEstimate>,
    /// `max_{i,j} ‖Â_i − Â_j‖_F` after `T1` rounds.
    pub max_pairwise: f64,
    pub extra_trace: Vec<ExtraTraceRow>,
}

impl EstimationOutcome {
    /// Every row of every agent's estimate lies within the radius.
    pub fn containment(&self) -> bool {
        self.agents.iter().all(|a| a.contained)
    }

    pub fn max_ridge_error(&self) -> f64 {
        self.agents.iter().map(|a| a.ridge_error).fold(0.0, f64::max)
    }
}

/// Exploration, EXTRA (with `T1` calibration) and the confidence radius for one seed.
pub fn run_estimation(prep: &Prepared, seed: u64) -> Result<EstimationOutcome, HarnessError> {
    let c = &prep.config;
    let e = &c.estimation;
    let s = &c.scenario;
    let truth = &prep.truth;
    let t0 = e.t0.unwrap_or_else(|| Schedule::preset_t0(s.horizon, c.schedule.c0));
    let cfg = ExplorationConfig::new(truth, prep.baseline.clone(), t0, prep.gamma, prep.sigma_zeta)
        .map_err(|err| HarnessError::Config(format!("estimation: {err}")))?;
    let log = estimation::explore(&cfg, truth, s.m, e.noise_r, e.noise, seed);
    let top = &prep.topology;
    let alpha = match e.alpha {
        Some(a) => a,
        None => estimation::default_extra_step(&log, top, e.lambda),
    };
    let target = (s.horizon as f64).powf(-e.rho);
    let t1 = match e.t1 {
        Some(t1) => t1,
        None => estimation::calibrate_t1(&log, top, alpha, e.lambda, seed, target, e.max_t1)
            .map_err(estimation_failure("estimate"))?,
    }
    .max(2);
    let ridge = estimation::centralized_ridge(&log, e.lambda).map_err(estimation_failure("estimate"))?;
    let (a_hats, extra_trace) = estimation::extra_solve_traced(&log, top, alpha, t1, e.lambda, seed, Some(&ridge))
        .map_err(estimation_failure("estimate"))?;
    let radius = estimation::confidence_radius(&RadiusInputs {
        horizon: s.horizon,
        rho: e.rho,
        noise_r: e.noise_r,
        d: s.d,
        m: s.m,
        t0,
        norm_bound: truth.norm_bound(),
        lambda: e.lambda,
        delta: e.delta,
        n: truth.constraints(),
        gamma: prep.gamma,
        sigma_zeta: prep.sigma_zeta,
        row_bound: truth.max_row_norm(),
    })
    .map_err(estimation_failure("estimate"))?;
    let required_t0 =
        estimation::required_t0(truth.norm_bound(), s.m, prep.gamma, prep.sigma_zeta, s.d, e.delta, 8.0);
    let provenance = Provenance { t0, t1, lambda: e.lambda, delta: e.delta, rho: e.rho };
    let agents = a_hats
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let max_row_error = estimation::max_row_error(a, truth.a());
            AgentEstimate { agent: i, max_row_error, ridge_error: (a - &ridge).norm(), contained: max_row_error <= radius }
        })
        .collect();
    let max_pairwise = estimation::max_pairwise(&a_hats);
    let estimates = a_hats
        .into_iter()
        .enumerate()
        .map(|(agent, a_hat)| SafeSetEstimate { a_hat, radius, agent, provenance })
        .collect();
    Ok(EstimationOutcome { log, estimates, t0, t1, required_t0, alpha, radius, agents, max_pairwise, extra_trace })
}

/// Builds the loss sequence for a seed and horizon.
pub fn build_losses(prep: &Prepared, seed: u64, horizon: usize) -> Result<LossSequence, HarnessError> {
    let s = &prep.config.scenario;
    let params = FamilyParams {
        d: s.d,
        m: s.m,
        horizon,
        drift: s.drift,
        spread: s.spread,
        start: s.start.clone(),
    };
    let mut r = rng::stream(seed, Purpose::Scenario, 0);
    let seq = match s.kind {
        LossKind::ConvexTracking => {
            let region = geometry::shrink_polytope(&prep.truth, s.margin, Some(&prep.baseline))
                .map_err(in_phase("scenario"))?;
            losses::make_convex_tracking(&params, &region, &prep.truth, &mut r)
        }
        LossKind::NonconvexReparameterized => {
            let b = s.safe_box.as_ref().ok_or_else(|| HarnessError::Config("scenario.box: required".into()))?;
            let lo = DVector::from_column_slice(&b.lo);
            let hi = DVector::from_column_slice(&b.hi);
            losses::make_nonconvex_family(&params, &lo, &hi, s.margin, s.mirror, &mut r)
        }
    };
    seq.map_err(|e: LossError| match e {
        LossError::DomainNotPositive => HarnessError::Config(format!("scenario: {e}")),
        other => in_phase("scenario")(other),
    })
}

/// Everything one seed produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub seed: u64,
    pub mode: Mode,
    pub losses: LossSequence,
    pub estimation: EstimationOutcome,
    pub record: RunRecord,
    pub trace: MinimizerTrace,
    pub regret: RegretReport,
    pub audit: SafetyAudit,
    pub tau_in: f64,
    /// `2ηG√mβ/(1−β)`, reported in non-convex mode.
    pub disagreement_bound: Option<f64>,
    /// Fitted constant of the heterogeneous-set disagreement scaling, convex mode.
    pub kappa: Option<f64>,
}

/// Scenario → exploration → EXTRA → (max-consensus) → optimisation → reports.
pub fn run_pipeline(prep: &Prepared, seed: u64) -> Result<PipelineOutput, HarnessError> {
    let c = &prep.config;
    let s = &c.scenario;
    let losses = build_losses(prep, seed, s.horizon)?;
    let est = run_estimation(prep, seed)?;
    let top = &prep.topology;
    let mode = prep.mode;
    let eta = c.schedule.eta.unwrap_or_else(|| Schedule::preset_eta(mode, s.horizon, c.schedule.c_eta));
    let schedule = Schedule {
        horizon: s.horizon,
        t0: est.t0,
        t1: est.t1,
        consensus_rounds: if mode == Mode::Nonconvex { top.diameter() } else { 0 },
        eta,
    };
    schedule.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut opts = RunOptions::new();
    opts.trace_projections = c.schedule.trace_projections;
    if c.schedule.shadow_omd {
        let b = match (&s.safe_box, s.kind) {
            (Some(b), LossKind::NonconvexReparameterized) => b,
            _ => return Err(HarnessError::Config("schedule.shadow_omd: needs the non-convex kind on a box".into())),
        };
        opts.shadow = Some(ShadowOptions {
            lo: DVector::from_column_slice(&b.lo),
            hi: DVector::from_column_slice(&b.hi),
            resync: c.schedule.shadow_resync,
        });
    }
    let scenario = Scenario { truth: prep.truth.clone(), baseline: prep.baseline.clone(), losses };
    let mode_proj = c.estimation.projection_mode;
    let record = match mode {
        Mode::Convex => optimizer::run_d_safe_ogd_convex(&scenario, top, &schedule, &est.log, &est.estimates, mode_proj, &opts),
        Mode::Nonconvex => {
            optimizer::run_d_safe_ogd_nonconvex(&scenario, top, &schedule, &est.log, &est.estimates, mode_proj, &opts)
        }
    }
    .map_err(optimizer_failure)?;
    let losses = scenario.losses;

    let mut trace = losses::minimizer_trace(&losses, &prep.truth, 1e-10).map_err(in_phase("report"))?;
    let tau_in = 2.0 * est.radius * prep.truth.norm_bound();
    match losses::attach_shrunk_comparator(&mut trace, &losses, &prep.truth, tau_in, Some(&prep.baseline)) {
        Ok(()) | Err(LossError::Geometry(GeometryError::EmptyShrunkSet { .. })) => {}
        Err(e) => return Err(in_phase("report")(e)),
    }
    let regret = compute_regret(&record, &trace)?;
    let audit = safety_audit(&record, &prep.truth);

    let beta = top.beta();
    let m_sqrt = (s.m as f64).sqrt();
    let (disagreement_bound, kappa) = match mode {
        Mode::Nonconvex => {
            let bound = optimizer::common_set_disagreement_bound(eta, losses.constants.gradient_bound, top);
            (bound.is_finite().then_some(bound), None)
        }
        Mode::Convex => {
            let scale = (eta + est.radius) * m_sqrt * beta / (1.0 - beta);
            let k = record.max_disagreement() / scale;
            (None, (scale > 0.0 && k.is_finite()).then_some(k))
        }
    };
    Ok(PipelineOutput {
        seed,
        mode,
        losses,
        estimation: est,
        record,
        trace,
        regret,
        audit,
        tau_in,
        disagreement_bound,
        kappa,
    })
}

/// Machine-readable per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub config_sha256: String,
    pub mode: Mode,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub horizon: usize,
    pub schedule: Schedule,
    pub truth: Polytope,
    pub baseline: Vec<f64>,
    pub beta: f64,
    pub diameter: usize,
    pub gamma: f64,
    pub sigma_zeta: f64,
    pub radius: f64,
    pub required_t0: usize,
    pub extra_alpha: f64,
    pub containment: bool,
    pub constants: LossConstants,
    pub path_length: f64,
    pub mean_regret: f64,
    pub regret: Vec<metrics::AgentRegret>,
    pub decomposition_residual: f64,
    pub violations: usize,
    pub worst_slack: f64,
    pub max_disagreement: f64,
    pub disagreement_bound: Option<f64>,
    pub kappa: Option<f64>,
    pub max_deviation: Option<f64>,
    pub shared_owner: Option<usize>,
    pub tau_in: f64,
    pub shrunk_comparator: bool,
}

impl PipelineOutput {
    pub fn summary(&self, prep: &Prepared) -> RunSummary {
        RunSummary {
            schema_version: config::SCHEMA_VERSION,
            seed: self.seed,
            config_sha256: prep.config.hash(),
            mode: self.mode,
            m: self.record.m,
            d: self.record.d,
            n: prep.truth.constraints(),
            horizon: self.record.horizon(),
            schedule: self.record.schedule,
            truth: prep.truth.clone(),
            baseline: prep.baseline.iter().copied().collect(),
            beta: prep.topology.beta(),
            diameter: prep.topology.diameter(),
            gamma: prep.gamma,
            sigma_zeta: prep.sigma_zeta,
            radius: self.estimation.radius,
            required_t0: self.estimation.required_t0,
            extra_alpha: self.estimation.alpha,
            containment: self.estimation.containment(),
            constants: self.losses.constants,
            path_length: self.trace.path_length,
            mean_regret: self.regret.mean_regret(),
            regret: self.regret.agents.clone(),
            decomposition_residual: self.regret.max_decomposition_residual(),
            violations: self.audit.violations,
            worst_slack: self.audit.worst_slack,
            max_disagreement: self.record.max_disagreement(),
            disagreement_bound: self.disagreement_bound,
            kappa: self.kappa,
            max_deviation: self.record.max_deviation(),
            shared_owner: self.record.shared_owner,
            tau_in: self.tau_in,
            shrunk_comparator: self.regret.shrunk_comparator,
        }
    }
}

/// Command-line style overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOptions {
    pub threads: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub output: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub trace_projections: bool,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub dir: PathBuf,
    pub summary: RunSummary,
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| HarnessError::Config(format!("threads: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Runs every seed of `config` and writes one directory per seed plus a
/// top-level `config.json` and `summary.csv`.
pub fn run_experiment(config: &ExperimentConfig, opts: &ExperimentOptions) -> Result<Vec<SeedOutcome>, HarnessError> {
    let mut config = config.clone();
    if let Some(seeds) = &opts.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(out) = &opts.output {
        config.output = out.clone();
    }
    if opts.mode.is_some() {
        config.mode = opts.mode;
    }
    config.schedule.trace_projections |= opts.trace_projections;
    let prep = config.prepare()?;
    let out = config.output.clone();
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.json"), config.to_json() + "\n")?;
    let outcomes: Vec<SeedOutcome> = with_pool(opts.threads, || {
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                let run = run_pipeline(&prep, seed)?;
                let dir = out.join(format!("seed_{seed}"));
                let summary = run.summary(&prep);
                io::write_run_dir(&dir, &prep, &run, &summary)?;
                Ok(SeedOutcome { seed, dir, summary })
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })??;
    io::write_experiment_summary(&out.join("summary.csv"), &outcomes)?;
    Ok(outcomes)
}

/// Mean regret of one horizon of a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub horizon: usize,
    pub runs: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    /// Mean regret over the non-optimisation rounds only.
    pub mean_term_i: f64,
    pub mean_path_length: f64,
    pub violations: usize,
    pub containment_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    pub fit: Option<PowerFit>,
    pub term_i_fit: Option<PowerFit>,
}

/// Seeds used for `repeats` runs: the config's seeds first, then consecutive
/// integers after the last one.
pub fn study_seeds(config: &ExperimentConfig, repeats: usize) -> Vec<u64> {
    let last = config.seeds.last().copied().unwrap_or(0);
    (0..repeats)
        .map(|k| config.seeds.get(k).copied().unwrap_or_else(|| last + (k + 1 - config.seeds.len()) as u64))
        .collect()
}

/// Runs the full pipeline for every `(T, seed)` and fits the regret exponent.
pub fn scaling_study(
    base: &ExperimentConfig,
    horizons: &[usize],
    repeats: usize,
    threads: Option<usize>,
) -> Result<ScalingStudy, HarnessError> {
    if horizons.windows(2).any(|w| w[0] >= w[1]) || horizons.is_empty() || repeats == 0 {
        return Err(HarnessError::Config("horizons must be strictly increasing and repeats positive".into()));
    }
    let seeds = study_seeds(base, repeats);
    let preps: Vec<Prepared> = horizons
        .iter()
        .map(|&t| {
            let mut c = base.clone();
            c.scenario.horizon = t;
            c.prepare()
        })
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..horizons.len()).flat_map(|h| seeds.iter().map(move |&s| (h, s))).collect();
    let results: Vec<(usize, f64, f64, f64, usize, bool)> = with_pool(threads, || {
        jobs.par_iter()
            .map(|&(h, seed)| {
                let run = run_pipeline(&preps[h], seed)?;
                Ok((
                    h,
                    run.regret.mean_regret(),
                    run.regret.mean_term_i(),
                    run.trace.path_length,
                    run.audit.violations,
                    run.estimation.containment(),
                ))
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })??;
    let rows: Vec<ScalingRow> = horizons
        .iter()
        .enumerate()
        .map(|(h, &horizon)| {
            let mine: Vec<_> = results.iter().filter(|r| r.0 == h).collect();
            let n = mine.len() as f64;
            let mean = mine.iter().map(|r| r.1).sum::<f64>() / n;
            let var = if mine.len() > 1 { mine.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            ScalingRow {
                horizon,
                runs: mine.len(),
                mean_regret: mean,
                std_regret: var.sqrt(),
                mean_term_i: mine.iter().map(|r| r.2).sum::<f64>() / n,
                mean_path_length: mine.iter().map(|r| r.3).sum::<f64>() / n,
                violations: mine.iter().map(|r| r.4).sum(),
                containment_runs: mine.iter().filter(|r| r.5).count(),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.horizon as f64).collect();
    let fit = fit_power_law(&xs, &rows.iter().map(|r| r.mean_regret).collect::<Vec<_>>());
    let term_i_fit = fit_power_law(&xs, &rows.iter().map(|r| r.mean_term_i).collect::<Vec<_>>());
    Ok(ScalingStudy { rows, fit, term_i_fit })
}

/// Max-over-rounds OGD/OMD deviation for each step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSweep {
    pub etas: Vec<f64>,
    pub max_deviation: Vec<f64>,
    pub fit: Option<PowerFit>,
}

/// Runs the non-convex optimiser with exact constraint knowledge (radius 0,
/// so the shared set is the true box) and the shadow mirror descent for
/// each `η`, over `rounds` optimisation rounds.
pub fn deviation_sweep(prep: &Prepared, seed: u64, etas: &[f64], rounds: usize) -> Result<DeviationSweep, HarnessError> {
    let s = &prep.config.scenario;
    let b = s
        .safe_box
        .as_ref()
        .filter(|_| s.kind == LossKind::NonconvexReparameterized)
        .ok_or_else(|| HarnessError::Config("deviation sweep needs the non-convex kind on a box".into()))?;
    let top = &prep.topology;
    let horizon = top.diameter() + rounds;
    let losses = build_losses(prep, seed, horizon)?;
    let scenario = Scenario { truth: prep.truth.clone(), baseline: prep.baseline.clone(), losses };
    let log = ExplorationLog { agents: vec![Default::default(); s.m], n: prep.truth.constraints(), d: s.d };
    let estimates: Vec<SafeSetEstimate> = (0..s.m)
        .map(|agent| SafeSetEstimate {
            a_hat: prep.truth.a().clone(),
            radius: 0.0,
            agent,
            provenance: Provenance { t0: 0, t1: 0, lambda: 0.0, delta: 0.0, rho: 0.0 },
        })
        .collect();
    let mut opts = RunOptions::new();
    opts.shadow = Some(ShadowOptions {
        lo: DVector::from_column_slice(&b.lo),
        hi: DVector::from_column_slice(&b.hi),
        resync: prep.config.schedule.shadow_resync,
    });
    let max_deviation = etas
        .par_iter()
        .map(|&eta| {
            let schedule = Schedule { horizon, t0: 0, t1: 0, consensus_rounds: top.diameter(), eta };
            let rec = optimizer::run_d_safe_ogd_nonconvex(
                &scenario,
                top,
                &schedule,
                &log,
                &estimates,
                prep.config.estimation.projection_mode,
                &opts,
            )
            .map_err(optimizer_failure)?;
            Ok(rec.max_deviation().unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>, HarnessError>>()?;
    let fit = fit_power_law(etas, &max_deviation);
    Ok(DeviationSweep { etas: etas.to_vec(), max_deviation, fit })
}

/// Result of re-auditing a run directory from its CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub seed: u64,
    pub violations: usize,
    pub worst_slack: f64,
    pub mean_regret: f64,
    /// Recomputed regret equals the stored summary bit for bit.
    pub regret_reproduced: bool,
    /// Every file hash in the manifest matches.
    pub manifest_ok: bool,
    pub decomposition_residual: f64,
}

/// Recomputes safety and regret from a run directory's CSV files.
pub fn audit_run_dir(dir: &Path) -> Result<AuditReport, HarnessError> {
    let summary = io::read_summary(&dir.join("summary.json"))?;
    let record = io::read_run_csv(&dir.join("run.csv"), &summary)?;
    let trace = io::read_trace_csv(&dir.join("trace.csv"), summary.d)?;
    let regret = compute_regret(&record, &trace)?;
    let audit = safety_audit(&record, &summary.truth);
    let manifest_ok = io::verify_manifest(dir)?;
    Ok(AuditReport {
        seed: summary.seed,
        violations: audit.violations,
        worst_slack: audit.worst_slack,
        mean_regret: regret.mean_regret(),
        regret_reproduced: regret.agents == summary.regret,
        manifest_ok,
        decomposition_residual: regret.max_decomposition_residual(),
    })
}
