//! Constraint estimation: safe exploration around the baseline action, noisy
//! observations of `A x`, per-agent ridge losses, the EXTRA decentralized
//! solver, the confidence radius and the per-agent robust safe sets.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Membership, Polytope, ProjectionMode, RobustSafeSet};
use crate::linalg;
use crate::network::{self, NetworkTopology};
use crate::rng::{self, Purpose};

/// Clip applied by [`gamma_max`] so that γ stays strictly below one.
pub const GAMMA_CLIP_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("{0} must be positive")]
    NonpositiveInput(&'static str),
    #[error("baseline action is not strictly feasible (row {row} has slack {slack})")]
    BaselineNotStrictlyFeasible { row: usize, slack: f64 },
    #[error("gamma {gamma} exceeds the safe exploration limit {limit}")]
    GammaTooLarge { gamma: f64, limit: f64 },
    #[error("exploration scale {sigma} exceeds L/sqrt(d) = {limit}")]
    SigmaTooLarge { sigma: f64, limit: f64 },
    #[error("exploration can leave the feasible set through row {row}")]
    UnsafeExploration { row: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("EXTRA diverged at iteration {iteration} (norm {norm:e})")]
    DivergenceDetected { iteration: usize, norm: f64 },
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("baseline action is outside the robust safe set; radius {radius} is too large")]
    EmptyEstimatedSet { radius: f64 },
    #[error("EXTRA did not reach the target accuracy {target:e} within {max_iter} iterations")]
    CalibrationFailed { target: f64, max_iter: usize },
}

/// `γ = Δˢ / (L · L_A)`, clipped to `[0, 1 − ε]`.
pub fn gamma_max(delta_s: f64, norm_bound: f64, row_bound: f64) -> Result<f64, EstimationError> {
    if !(delta_s > 0.0) {
        return Err(EstimationError::NonpositiveInput("safety gap"));
    }
    if !(norm_bound > 0.0) {
        return Err(EstimationError::NonpositiveInput("L"));
    }
    if !(row_bound > 0.0) {
        return Err(EstimationError::NonpositiveInput("L_A"));
    }
    Ok((delta_s / (norm_bound * row_bound)).min(1.0 - GAMMA_CLIP_EPS))
}

/// Largest γ for which `(1−γ)xˢ + γζ` stays feasible for every Rademacher
/// draw `ζ ∈ {±σ}^d`, row by row: `(1−γ)bˢ_k + γ‖a_k‖σ√d ≤ b_k`.
///
/// Agrees with [`gamma_max`] when `bˢ ≥ 0`; smaller when some baseline
/// offsets are negative.
pub fn exact_safe_gamma(truth: &Polytope, baseline: &DVector<f64>, sigma_zeta: f64) -> f64 {
    let bs = truth.a() * baseline;
    let reach = sigma_zeta * (truth.dim() as f64).sqrt();
    (0..truth.constraints())
        .map(|k| {
            let gap = truth.b()[k] - bs[k];
            let pull = truth.a().row(k).norm() * reach - bs[k];
            if pull <= 0.0 {
                1.0 - GAMMA_CLIP_EPS
            } else {
                (gap / pull).min(1.0 - GAMMA_CLIP_EPS)
            }
        })
        .fold(1.0 - GAMMA_CLIP_EPS, f64::min)
}

/// Parameters of the exploration phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationConfig {
    pub t0: usize,
    pub gamma: f64,
    pub sigma_zeta: f64,
    #[serde(with = "crate::serde_mat::vector")]
    pub baseline: DVector<f64>,
    #[serde(with = "crate::serde_mat::vector")]
    pub baseline_offsets: DVector<f64>,
    pub safety_gap: f64,
}

impl ExplorationConfig {
    /// Builds and validates an exploration config against the (hidden) truth.
    pub fn new(
        truth: &Polytope,
        baseline: DVector<f64>,
        t0: usize,
        gamma: f64,
        sigma_zeta: f64,
    ) -> Result<Self, EstimationError> {
        if baseline.len() != truth.dim() {
            return Err(EstimationError::DimensionMismatch(format!(
                "baseline has {} entries, polytope dimension {}",
                baseline.len(),
                truth.dim()
            )));
        }
        let slack = truth.slack(&baseline);
        if let Some(row) = (0..slack.len()).find(|&k| slack[k] <= 0.0) {
            return Err(EstimationError::BaselineNotStrictlyFeasible { row, slack: slack[row] });
        }
        let safety_gap = slack.min();
        let norm_bound = truth.norm_bound();
        let limit = gamma_max(safety_gap, norm_bound, truth.max_row_norm())?;
        if !(0.0..1.0).contains(&gamma) || gamma > limit * (1.0 + 1e-12) {
            return Err(EstimationError::GammaTooLarge { gamma, limit });
        }
        let sigma_limit = norm_bound / (truth.dim() as f64).sqrt();
        if !(sigma_zeta > 0.0) || sigma_zeta > sigma_limit * (1.0 + 1e-12) {
            return Err(EstimationError::SigmaTooLarge { sigma: sigma_zeta, limit: sigma_limit });
        }
        let baseline_offsets = truth.a() * &baseline;
        let reach = sigma_zeta * (truth.dim() as f64).sqrt();
        for k in 0..truth.constraints() {
            let worst = (1.0 - gamma) * baseline_offsets[k] + gamma * truth.a().row(k).norm() * reach;
            if worst > truth.b()[k] {
                return Err(EstimationError::UnsafeExploration { row: k });
            }
        }
        Ok(Self { t0, gamma, sigma_zeta, baseline, baseline_offsets, safety_gap })
    }
}

/// `(1−γ)xˢ + γζ` with `ζ` i.i.d. Rademacher coordinates scaled by `σ_ζ`.
pub fn exploration_action<R: Rng + ?Sized>(cfg: &ExplorationConfig, rng: &mut R) -> DVector<f64> {
    let zeta = DVector::from_fn(cfg.baseline.len(), |_, _| {
        if rng.random::<bool>() {
            cfg.sigma_zeta
        } else {
            -cfg.sigma_zeta
        }
    });
    &cfg.baseline * (1.0 - cfg.gamma) + zeta * cfg.gamma
}

/// Observation noise family. Both have per-coordinate standard deviation `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Gaussian,
    /// Uniform on `[−R√3, R√3]`.
    Uniform,
}

/// `A x + w`.
pub fn observe<R: Rng + ?Sized>(
    truth: &Polytope,
    x: &DVector<f64>,
    noise_r: f64,
    model: NoiseModel,
    rng: &mut R,
) -> DVector<f64> {
    let clean = truth.a() * x;
    if noise_r == 0.0 {
        return clean;
    }
    match model {
        NoiseModel::Gaussian => {
            let normal = Normal::new(0.0, noise_r).expect("finite positive std");
            clean.map(|v| v + normal.sample(rng))
        }
        NoiseModel::Uniform => {
            let half = noise_r * 3f64.sqrt();
            clean.map(|v| v + rng.random_range(-half..=half))
        }
    }
}

/// Actions and observations of one agent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentLog {
    pub actions: Vec<DVector<f64>>,
    pub observations: Vec<DVector<f64>>,
}

impl AgentLog {
    /// `(Σ x xᵀ, Σ x̂ xᵀ, Σ ‖x̂‖²)`.
    pub fn sufficient_stats(&self, n: usize, d: usize) -> LocalStats {
        let mut sxx = DMatrix::zeros(d, d);
        let mut sox = DMatrix::zeros(n, d);
        let mut soo = 0.0;
        for (x, o) in self.actions.iter().zip(&self.observations) {
            sxx.ger(1.0, x, x, 1.0);
            sox.ger(1.0, o, x, 1.0);
            soo += o.norm_squared();
        }
        LocalStats { sxx, sox, soo }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalStats {
    pub sxx: DMatrix<f64>,
    pub sox: DMatrix<f64>,
    pub soo: f64,
}

/// Everything the agents saw during exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationLog {
    pub agents: Vec<AgentLog>,
    /// Rows of `A` (observation dimension).
    pub n: usize,
    pub d: usize,
}

impl ExplorationLog {
    pub fn stats(&self) -> Vec<LocalStats> {
        self.agents.iter().map(|a| a.sufficient_stats(self.n, self.d)).collect()
    }
}

/// Runs `T0` exploration rounds for `m` agents.
pub fn explore(
    cfg: &ExplorationConfig,
    truth: &Polytope,
    m: usize,
    noise_r: f64,
    noise: NoiseModel,
    master_seed: u64,
) -> ExplorationLog {
    let agents = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut act_rng = rng::stream(master_seed, Purpose::Exploration, i);
            let mut obs_rng = rng::stream(master_seed, Purpose::Observation, i);
            let mut log = AgentLog::default();
            for _ in 0..cfg.t0 {
                let x = exploration_action(cfg, &mut act_rng);
                let o = observe(truth, &x, noise_r, noise, &mut obs_rng);
                log.actions.push(x);
                log.observations.push(o);
            }
            log
        })
        .collect();
    ExplorationLog { agents, n: truth.constraints(), d: truth.dim() }
}

/// `l_i(A) = Σ_t ‖A x_t − x̂_t‖² + (λ/m)‖A‖_F²` in sufficient-statistic form.
#[derive(Debug, Clone)]
pub struct LocalLoss {
    stats: LocalStats,
    lambda: f64,
    m: usize,
}

impl LocalLoss {
    pub fn new(stats: LocalStats, lambda: f64, m: usize) -> Self {
        Self { stats, lambda, m }
    }

    pub fn value(&self, a: &DMatrix<f64>) -> f64 {
        // Σ‖Ax‖² − 2Σ x̂ᵀAx + Σ‖x̂‖²
        let quad = (a * &self.stats.sxx).component_mul(a).sum();
        let cross = self.stats.sox.component_mul(a).sum();
        quad - 2.0 * cross + self.stats.soo + self.lambda / self.m as f64 * a.norm_squared()
    }

    pub fn gradient(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        (a * &self.stats.sxx - &self.stats.sox) * 2.0 + a * (2.0 * self.lambda / self.m as f64)
    }

    /// Lipschitz constant of the gradient, `2(λ_max(Σxxᵀ) + λ/m)`.
    pub fn smoothness(&self) -> f64 {
        2.0 * (linalg::max_eigenvalue_psd(&self.stats.sxx) + self.lambda / self.m as f64)
    }
}

/// `∇l_i(A) = 2 Σ_t (A x_t − x̂_t) x_tᵀ + (2λ/m) A`.
pub fn local_loss_gradient(
    a_var: &DMatrix<f64>,
    log_i: &AgentLog,
    lambda: f64,
    m: usize,
) -> Result<DMatrix<f64>, EstimationError> {
    let (n, d) = a_var.shape();
    if log_i.actions.iter().any(|x| x.len() != d) || log_i.observations.iter().any(|o| o.len() != n) {
        return Err(EstimationError::DimensionMismatch(format!(
            "log entries do not match a {n}x{d} parameter"
        )));
    }
    Ok(LocalLoss::new(log_i.sufficient_stats(n, d), lambda, m).gradient(a_var))
}

/// Exact minimiser of `Σ_i l_i` from the normal equations
/// `Â (Σ x xᵀ + λI) = Σ x̂ xᵀ`.
pub fn centralized_ridge(log: &ExplorationLog, lambda: f64) -> Result<DMatrix<f64>, EstimationError> {
    if !(lambda > 0.0) {
        return Err(EstimationError::NonpositiveInput("lambda"));
    }
    let stats = log.stats();
    let mut v = DMatrix::identity(log.d, log.d) * lambda;
    let mut sox = DMatrix::zeros(log.n, log.d);
    for s in &stats {
        v += &s.sxx;
        sox += &s.sox;
    }
    // V symmetric: Âᵀ = V⁻¹ (Σ x̂ xᵀ)ᵀ
    linalg::solve_spd(&v, &sox.transpose())
        .map(|at| at.transpose())
        .ok_or(EstimationError::SingularSystem)
}

/// `λ_min(Σ x xᵀ + λ I)` over all agents' exploration data.
pub fn gram_min_eigenvalue(log: &ExplorationLog, lambda: f64) -> f64 {
    let mut v = DMatrix::identity(log.d, log.d) * lambda;
    for s in log.stats() {
        v += s.sxx;
    }
    linalg::symmetric_eigenvalues(&v)[0]
}

/// Step size inside EXTRA's stability region for these losses:
/// `min(1/(2L), λ_min(P̃)/L)` with `L` the worst agent's gradient Lipschitz constant.
pub fn default_extra_step(log: &ExplorationLog, topology: &NetworkTopology, lambda: f64) -> f64 {
    let m = topology.agents();
    let smooth = log
        .stats()
        .into_iter()
        .map(|s| LocalLoss::new(s, lambda, m).smoothness())
        .fold(0.0, f64::max);
    let lazy_min = linalg::symmetric_eigenvalues(&topology.lazy_matrix())[0];
    (0.5 / smooth).min(lazy_min / smooth)
}

/// Per-iteration EXTRA diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraTraceRow {
    pub iteration: usize,
    pub agent: usize,
    /// Frobenius distance to the reference estimate, when one is supplied.
    pub error_to_oracle: Option<f64>,
    /// `max_j ‖Â_i − Â_j‖_F`.
    pub pairwise_disagreement: f64,
}

/// Stepwise EXTRA iteration over the ridge losses.
pub struct ExtraSolver<'a> {
    losses: Vec<LocalLoss>,
    topology: &'a NetworkTopology,
    lazy: DMatrix<f64>,
    alpha: f64,
    prev: Vec<DMatrix<f64>>,
    cur: Vec<DMatrix<f64>>,
    prev_grad: Vec<DMatrix<f64>>,
    /// Number of completed communication rounds (iterate index of `cur`).
    iteration: usize,
    divergence_limit: f64,
}

impl<'a> ExtraSolver<'a> {
    /// Draws the random `Â⁰` from the seeded init streams and performs the
    /// first (plain mixing + gradient) step.
    pub fn new(
        log: &ExplorationLog,
        topology: &'a NetworkTopology,
        alpha: f64,
        lambda: f64,
        seed: u64,
    ) -> Result<Self, EstimationError> {
        if !(alpha > 0.0) {
            return Err(EstimationError::NonpositiveInput("alpha"));
        }
        if !(lambda > 0.0) {
            return Err(EstimationError::NonpositiveInput("lambda"));
        }
        let m = topology.agents();
        if log.agents.len() != m {
            return Err(EstimationError::DimensionMismatch(format!(
                "{} agent logs for {m} agents",
                log.agents.len()
            )));
        }
        let losses: Vec<LocalLoss> =
            log.stats().into_iter().map(|s| LocalLoss::new(s, lambda, m)).collect();
        let init: Vec<DMatrix<f64>> = (0..m)
            .map(|i| {
                let mut r = rng::stream(seed, Purpose::ExtraInit, i);
                DMatrix::from_fn(log.n, log.d, |_, _| r.random_range(-1.0..=1.0))
            })
            .collect();
        let data_scale = losses
            .iter()
            .map(|l| l.stats.sox.norm())
            .chain(init.iter().map(|a| a.norm()))
            .fold(1.0, f64::max);
        let grads: Vec<DMatrix<f64>> = init.par_iter().zip(&losses).map(|(a, l)| l.gradient(a)).collect();
        let mixed = network::mix_matrices(topology.matrix(), &init);
        let cur: Vec<DMatrix<f64>> = mixed
            .into_iter()
            .zip(&grads)
            .map(|(mx, g)| mx - g * alpha)
            .collect();
        let solver = Self {
            losses,
            topology,
            lazy: topology.lazy_matrix(),
            alpha,
            prev: init,
            cur,
            prev_grad: grads,
            iteration: 1,
            divergence_limit: 1e6 * data_scale,
        };
        solver.check_divergence()?;
        Ok(solver)
    }

    fn check_divergence(&self) -> Result<(), EstimationError> {
        for a in &self.cur {
            let norm = a.norm();
            if !norm.is_finite() || norm > self.divergence_limit {
                return Err(EstimationError::DivergenceDetected { iteration: self.iteration, norm });
            }
        }
        Ok(())
    }

    /// `Â^{t+2}_i = Σ_j 2P̃_{ji}Â^{t+1}_j − Σ_j P̃_{ji}Â^t_j − α[∇l_i(Â^{t+1}_i) − ∇l_i(Â^t_i)]`.
    pub fn step(&mut self) -> Result<(), EstimationError> {
        let grads: Vec<DMatrix<f64>> =
            self.cur.par_iter().zip(&self.losses).map(|(a, l)| l.gradient(a)).collect();
        let mix_cur = network::mix_matrices(&self.lazy, &self.cur);
        let mix_prev = network::mix_matrices(&self.lazy, &self.prev);
        let next: Vec<DMatrix<f64>> = (0..self.cur.len())
            .map(|i| &mix_cur[i] * 2.0 - &mix_prev[i] - (&grads[i] - &self.prev_grad[i]) * self.alpha)
            .collect();
        self.prev = std::mem::replace(&mut self.cur, next);
        self.prev_grad = grads;
        self.iteration += 1;
        self.check_divergence()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn estimates(&self) -> &[DMatrix<f64>] {
        &self.cur
    }

    pub fn into_estimates(self) -> Vec<DMatrix<f64>> {
        self.cur
    }

    pub fn topology(&self) -> &NetworkTopology {
        self.topology
    }

    /// `max_{i,j} ‖Â_i − Â_j‖_F`.
    pub fn disagreement(&self) -> f64 {
        max_pairwise(&self.cur)
    }

    pub fn max_error_to(&self, reference: &DMatrix<f64>) -> f64 {
        self.cur.iter().map(|a| (a - reference).norm()).fold(0.0, f64::max)
    }
}

pub fn max_pairwise(estimates: &[DMatrix<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..estimates.len() {
        for j in (i + 1)..estimates.len() {
            worst = worst.max((&estimates[i] - &estimates[j]).norm());
        }
    }
    worst
}

/// Runs `T1` EXTRA communication rounds and returns the final per-agent estimates.
pub fn extra_solve(
    log: &ExplorationLog,
    topology: &NetworkTopology,
    alpha: f64,
    t1: usize,
    lambda: f64,
    seed: u64,
) -> Result<Vec<DMatrix<f64>>, EstimationError> {
    extra_solve_traced(log, topology, alpha, t1, lambda, seed, None).map(|(e, _)| e)
}

/// [`extra_solve`] with a per-iteration trace.
pub fn extra_solve_traced(
    log: &ExplorationLog,
    topology: &NetworkTopology,
    alpha: f64,
    t1: usize,
    lambda: f64,
    seed: u64,
    oracle: Option<&DMatrix<f64>>,
) -> Result<(Vec<DMatrix<f64>>, Vec<ExtraTraceRow>), EstimationError> {
    if t1 < 2 {
        return Err(EstimationError::NonpositiveInput("T1 - 1"));
    }
    let mut solver = ExtraSolver::new(log, topology, alpha, lambda, seed)?;
    let mut trace = Vec::new();
    record(&solver, oracle, &mut trace);
    while solver.iteration() < t1 {
        solver.step()?;
        record(&solver, oracle, &mut trace);
    }
    Ok((solver.into_estimates(), trace))
}

fn record(solver: &ExtraSolver<'_>, oracle: Option<&DMatrix<f64>>, out: &mut Vec<ExtraTraceRow>) {
    let est = solver.estimates();
    for (i, a) in est.iter().enumerate() {
        let pairwise = est.iter().map(|b| (a - b).norm()).fold(0.0, f64::max);
        out.push(ExtraTraceRow {
            iteration: solver.iteration(),
            agent: i,
            error_to_oracle: oracle.map(|o| (a - o).norm()),
            pairwise_disagreement: pairwise,
        });
    }
}

/// Smallest `T1 ≥ 2` for which every agent's EXTRA iterate lies within
/// `target` (Frobenius) of the centralized ridge solution.
pub fn calibrate_t1(
    log: &ExplorationLog,
    topology: &NetworkTopology,
    alpha: f64,
    lambda: f64,
    seed: u64,
    target: f64,
    max_iter: usize,
) -> Result<usize, EstimationError> {
    let reference = centralized_ridge(log, lambda)?;
    let mut solver = ExtraSolver::new(log, topology, alpha, lambda, seed)?;
    solver.step()?;
    while solver.max_error_to(&reference) > target {
        if solver.iteration() >= max_iter {
            return Err(EstimationError::CalibrationFailed { target, max_iter });
        }
        solver.step()?;
    }
    Ok(solver.iteration())
}

/// Inputs of the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusInputs {
    pub horizon: usize,
    pub rho: f64,
    pub noise_r: f64,
    pub d: usize,
    pub m: usize,
    pub t0: usize,
    /// `L`
    pub norm_bound: f64,
    pub lambda: f64,
    pub delta: f64,
    pub n: usize,
    pub gamma: f64,
    pub sigma_zeta: f64,
    /// `L_A`
    pub row_bound: f64,
}

/// `B_r = 1/T^ρ + (R√(d·log((1 + mT₀L²/λ)/(δ/n))) + √λ·L_A) / √(½·m·γ²·σ_ζ²·T₀)`.
pub fn confidence_radius(p: &RadiusInputs) -> Result<f64, EstimationError> {
    let positive = [
        ("T", p.horizon as f64),
        ("rho", p.rho),
        ("d", p.d as f64),
        ("m", p.m as f64),
        ("T0", p.t0 as f64),
        ("L", p.norm_bound),
        ("lambda", p.lambda),
        ("delta", p.delta),
        ("n", p.n as f64),
        ("gamma", p.gamma),
        ("sigma_zeta", p.sigma_zeta),
    ];
    if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(EstimationError::NonpositiveInput(name));
    }
    if p.noise_r < 0.0 || p.row_bound < 0.0 {
        return Err(EstimationError::NonpositiveInput("R or L_A"));
    }
    if p.delta >= 1.0 {
        return Err(EstimationError::NonpositiveInput("1 - delta"));
    }
    let consensus = (p.horizon as f64).powf(-p.rho);
    let (m, t0, l) = (p.m as f64, p.t0 as f64, p.norm_bound);
    let log_term = ((1.0 + m * t0 * l * l / p.lambda) / (p.delta / p.n as f64)).ln();
    let numer = p.noise_r * (p.d as f64 * log_term).sqrt() + p.lambda.sqrt() * p.row_bound;
    let denom = (0.5 * m * p.gamma * p.gamma * p.sigma_zeta * p.sigma_zeta * t0).sqrt();
    Ok(consensus + numer / denom)
}

/// Data-collection length `⌈c · L²/(mγ²σ_ζ²) · log(d/δ)⌉`.
pub fn required_t0(norm_bound: f64, m: usize, gamma: f64, sigma_zeta: f64, d: usize, delta: f64, factor: f64) -> usize {
    let base = norm_bound * norm_bound / (m as f64 * gamma * gamma * sigma_zeta * sigma_zeta);
    (factor * base * (d as f64 / delta).ln()).ceil().max(1.0) as usize
}

/// Where an estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub t0: usize,
    pub t1: usize,
    pub lambda: f64,
    pub delta: f64,
    pub rho: f64,
}

/// One agent's constraint estimate with its confidence radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafeSetEstimate {
    #[serde(with = "crate::serde_mat::rows")]
    pub a_hat: DMatrix<f64>,
    pub radius: f64,
    pub agent: usize,
    pub provenance: Provenance,
}

impl SafeSetEstimate {
    /// Largest row error `max_k ‖â_k − a_k‖` against the hidden truth.
    pub fn max_row_error(&self, truth: &Polytope) -> f64 {
        max_row_error(&self.a_hat, truth.a())
    }

    pub fn contains_truth(&self, truth: &Polytope) -> bool {
        self.max_row_error(truth) <= self.radius
    }
}

pub fn max_row_error(a_hat: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    (0..a.nrows()).map(|k| (a_hat.row(k) - a.row(k)).norm()).fold(0.0, f64::max)
}

/// Packages an estimate into a [`RobustSafeSet`], refusing it when the
/// baseline action is not robustly feasible.
pub fn build_safe_set(
    a_hat: &DMatrix<f64>,
    b: &DVector<f64>,
    radius: f64,
    mode: ProjectionMode,
    norm_bound: f64,
    baseline: &DVector<f64>,
) -> Result<RobustSafeSet, EstimationError> {
    if radius < 0.0 || !radius.is_finite() {
        return Err(EstimationError::NonpositiveInput("radius"));
    }
    let set = RobustSafeSet { a_hat: a_hat.clone(), b: b.clone(), radius, mode, norm_bound };
    let inside = set
        .contains(baseline, 0.0)
        .map_err(|e| EstimationError::DimensionMismatch(e.to_string()))?;
    if !inside {
        return Err(EstimationError::EmptyEstimatedSet { radius });
    }
    Ok(set)
}
