//! The online phase: per-agent projected gradient steps onto robust safe sets
//! followed by gossip averaging, in a convex mode (each agent keeps its own
//! set) and a non-convex mode (max-consensus first, then one shared set),
//! plus a shadow mirror-descent run used to measure the OGD/OMD deviation.
//!
//! Rounds are 0-based. Rounds `0..T0` replay the exploration actions,
//! `T0..T0+T1` (and the `D_G` max-consensus rounds in non-convex mode) play
//! the baseline, and the remaining rounds run the optimizer.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{self, EstimationError, ExplorationLog, SafeSetEstimate};
use crate::geometry::{self, GeometryError, Polytope, ProjectionMode, Projected, RobustSafeSet};
use crate::losses::{LossError, LossSequence, MirrorMap};
use crate::network::{self, NetworkError, NetworkTopology};

/// Slack below which an action counts as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid schedule: {0}")]
    ScheduleInvalid(String),
    #[error("shadow mirror descent needs a box domain")]
    ShadowUnavailable,
    #[error("round {t}: {source}")]
    Geometry { t: usize, source: GeometryError },
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Convex,
    Nonconvex,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "convex" => Ok(Self::Convex),
            "nonconvex" | "non-convex" => Ok(Self::Nonconvex),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Convex => "convex",
            Self::Nonconvex => "nonconvex",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Explore,
    Estimate,
    Consensus,
    Optimize,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Explore => "explore",
            Self::Estimate => "estimate",
            Self::Consensus => "consensus",
            Self::Optimize => "optimize",
        })
    }
}

impl FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explore" => Ok(Self::Explore),
            "estimate" => Ok(Self::Estimate),
            "consensus" => Ok(Self::Consensus),
            "optimize" => Ok(Self::Optimize),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

/// Phase lengths and step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub horizon: usize,
    pub t0: usize,
    pub t1: usize,
    /// `D_G` in non-convex mode, zero otherwise.
    pub consensus_rounds: usize,
    pub eta: f64,
}

impl Schedule {
    /// `T0 = ⌈c₀ T^{2/3}⌉`.
    pub fn preset_t0(horizon: usize, c0: f64) -> usize {
        (c0 * (horizon as f64).powf(2.0 / 3.0)).ceil().max(1.0) as usize
    }

    /// `η = c_η T^{−1/3}` (convex) or `c_η T^{−2/3}` (non-convex).
    pub fn preset_eta(mode: Mode, horizon: usize, c_eta: f64) -> f64 {
        let p = match mode {
            Mode::Convex => -1.0 / 3.0,
            Mode::Nonconvex => -2.0 / 3.0,
        };
        c_eta * (horizon as f64).powf(p)
    }

    pub fn convex(horizon: usize, t1: usize, c_eta: f64, c0: f64) -> Self {
        Self {
            horizon,
            t0: Self::preset_t0(horizon, c0),
            t1,
            consensus_rounds: 0,
            eta: Self::preset_eta(Mode::Convex, horizon, c_eta),
        }
    }

    pub fn nonconvex(horizon: usize, t1: usize, diameter: usize, c_eta: f64, c0: f64) -> Self {
        Self {
            horizon,
            t0: Self::preset_t0(horizon, c0),
            t1,
            consensus_rounds: diameter,
            eta: Self::preset_eta(Mode::Nonconvex, horizon, c_eta),
        }
    }

    /// First optimisation round (0-based), i.e. `T_s − 1`.
    pub fn start(&self) -> usize {
        self.t0 + self.t1 + self.consensus_rounds
    }

    pub fn phase(&self, t: usize) -> Phase {
        if t < self.t0 {
            Phase::Explore
        } else if t < self.t0 + self.t1 {
            Phase::Estimate
        } else if t < self.start() {
            Phase::Consensus
        } else {
            Phase::Optimize
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(OptimizerError::ScheduleInvalid(format!("eta = {} must be positive", self.eta)));
        }
        if self.start() >= self.horizon {
            return Err(OptimizerError::ScheduleInvalid(format!(
                "T0 + T1 + D_G = {} leaves no optimisation rounds in T = {}",
                self.start(),
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Ground truth, baseline and losses for one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub truth: Polytope,
    pub baseline: DVector<f64>,
    pub losses: LossSequence,
}

/// Per-agent iterates. `u`/`z` are only populated by the shadow run.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: Option<DVector<f64>>,
    pub z: Option<DVector<f64>>,
}

/// Shadow mirror-descent settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowOptions {
    /// `x`-space box whose `q`-image is the mirror domain.
    pub lo: DVector<f64>,
    pub hi: DVector<f64>,
    /// Restart `u_{i,t}` at `q(x_{i,t})` every round so the recorded value is
    /// the one-step deviation. When false the shadow runs freely.
    pub resync: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub trace_projections: bool,
    pub shadow: Option<ShadowOptions>,
}

impl RunOptions {
    pub fn new() -> Self {
        Self { tol: geometry::DEFAULT_TOL, max_iter: geometry::DEFAULT_MAX_ITER, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTraceRow {
    pub t: usize,
    pub agent: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// Everything the run produced, round by round.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub mode: Mode,
    pub m: usize,
    pub d: usize,
    pub schedule: Schedule,
    /// `[t][i][j]` flattened.
    pub actions: Vec<f64>,
    /// `f_{i,t}(x_{i,t})`, `[t][i]`.
    pub local_losses: Vec<f64>,
    /// `f_t(x_{i,t}) = Σ_j f_{j,t}(x_{i,t})`, `[t][i]`.
    pub global_losses: Vec<f64>,
    pub feasible: Vec<bool>,
    /// `max_i ‖x̄_t − x_{i,t}‖`, one per round.
    pub disagreement: Vec<f64>,
    /// `‖q(x_{i,t}) − u_{i,t}‖`, `[t][i]`, zero before the optimisation phase.
    pub deviation: Option<Vec<f64>>,
    pub projections: Vec<ProjectionTraceRow>,
    /// Radius of the set each agent projected onto.
    pub radii: Vec<f64>,
    /// Owner of the shared estimate in non-convex mode.
    pub shared_owner: Option<usize>,
}

impl RunRecord {
    pub fn horizon(&self) -> usize {
        self.schedule.horizon
    }

    pub fn action(&self, t: usize, i: usize) -> DVector<f64> {
        let o = (t * self.m + i) * self.d;
        DVector::from_column_slice(&self.actions[o..o + self.d])
    }

    pub fn global_loss(&self, t: usize, i: usize) -> f64 {
        self.global_losses[t * self.m + i]
    }

    pub fn local_loss(&self, t: usize, i: usize) -> f64 {
        self.local_losses[t * self.m + i]
    }

    pub fn is_feasible(&self, t: usize, i: usize) -> bool {
        self.feasible[t * self.m + i]
    }

    pub fn deviation_at(&self, t: usize, i: usize) -> Option<f64> {
        self.deviation.as_ref().map(|d| d[t * self.m + i])
    }

    /// Largest recorded deviation over the optimisation phase.
    pub fn max_deviation(&self) -> Option<f64> {
        self.deviation.as_ref().map(|d| d.iter().copied().fold(0.0, f64::max))
    }

    pub fn max_disagreement(&self) -> f64 {
        self.disagreement[self.schedule.start()..].iter().copied().fold(0.0, f64::max)
    }
}

/// `Π_{X̂}[x − η g]` onto one agent's robust set.
pub fn ogd_local_step(
    x: &DVector<f64>,
    gradient: &DVector<f64>,
    eta: f64,
    set: &RobustSafeSet,
    tol: f64,
    max_iter: usize,
) -> Result<Projected, GeometryError> {
    geometry::project_robust_set_traced(set, &(x - gradient * eta), tol, max_iter)
}

/// Entropic mirror step clamped to the `u`-space box `[lo, hi]`; exact for
/// a separable potential over a box.
pub fn omd_local_step(
    u: &DVector<f64>,
    gradient_tilde: &DVector<f64>,
    eta: f64,
    mirror: MirrorMap,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> Result<DVector<f64>, LossError> {
    let z = mirror.mirror_step(u, gradient_tilde, eta)?;
    Ok(DVector::from_fn(z.len(), |j, _| z[j].clamp(lo[j], hi[j])))
}

fn network_mean(xs: &[DVector<f64>]) -> DVector<f64> {
    let mut acc = DVector::zeros(xs[0].len());
    for x in xs {
        acc += x;
    }
    acc / xs.len() as f64
}

fn max_spread(xs: &[DVector<f64>]) -> f64 {
    let mean = network_mean(xs);
    xs.iter().map(|x| (x - &mean).norm()).fold(0.0, f64::max)
}

/// `max_i ‖x̄_t − x_{i,t}‖` for a recorded round.
pub fn consensus_disagreement(record: &RunRecord, t: usize) -> f64 {
    let xs: Vec<DVector<f64>> = (0..record.m).map(|i| record.action(t, i)).collect();
    max_spread(&xs)
}

/// `2ηG√m β/(1−β)`; infinite when `β = 1`.
pub fn common_set_disagreement_bound(eta: f64, gradient_bound: f64, topology: &NetworkTopology) -> f64 {
    let beta = topology.beta();
    if beta >= 1.0 {
        return f64::INFINITY;
    }
    2.0 * eta * gradient_bound * (topology.agents() as f64).sqrt() * beta / (1.0 - beta)
}

fn robust_sets(
    scenario: &Scenario,
    estimates: &[&SafeSetEstimate],
    mode: ProjectionMode,
) -> Result<Vec<RobustSafeSet>, EstimationError> {
    let norm_bound = scenario.truth.norm_bound();
    estimates
        .iter()
        .map(|e| {
            estimation::build_safe_set(&e.a_hat, scenario.truth.b(), e.radius, mode, norm_bound, &scenario.baseline)
        })
        .collect()
}

fn check_inputs(
    scenario: &Scenario,
    topology: &NetworkTopology,
    schedule: &Schedule,
    exploration: &ExplorationLog,
    estimates: &[SafeSetEstimate],
) -> Result<(), OptimizerError> {
    schedule.validate()?;
    let m = topology.agents();
    let seq = &scenario.losses;
    if seq.m != m || estimates.len() != m || exploration.agents.len() != m {
        return Err(OptimizerError::ScheduleInvalid(format!(
            "agent counts disagree: topology {m}, losses {}, estimates {}, exploration {}",
            seq.m,
            estimates.len(),
            exploration.agents.len()
        )));
    }
    if seq.horizon != schedule.horizon {
        return Err(OptimizerError::ScheduleInvalid(format!(
            "loss horizon {} differs from schedule horizon {}",
            seq.horizon, schedule.horizon
        )));
    }
    if exploration.agents.iter().any(|a| a.actions.len() != schedule.t0) {
        return Err(OptimizerError::ScheduleInvalid("exploration log length differs from T0".into()));
    }
    Ok(())
}

/// Convex mode: every agent projects onto its own robust set.
pub fn run_d_safe_ogd_convex(
    scenario: &Scenario,
    topology: &NetworkTopology,
    schedule: &Schedule,
    exploration: &ExplorationLog,
    estimates: &[SafeSetEstimate],
    projection: ProjectionMode,
    opts: &RunOptions,
) -> Result<RunRecord, OptimizerError> {
    check_inputs(scenario, topology, schedule, exploration, estimates)?;
    let refs: Vec<&SafeSetEstimate> = estimates.iter().collect();
    let sets = robust_sets(scenario, &refs, projection)?;
    run_rounds(scenario, topology, schedule, exploration, &sets, Mode::Convex, None, opts)
}

/// Non-convex mode: `D_G` rounds of max-consensus over the estimates, then
/// every agent projects onto the single set built from the agreed estimate.
pub fn run_d_safe_ogd_nonconvex(
    scenario: &Scenario,
    topology: &NetworkTopology,
    schedule: &Schedule,
    exploration: &ExplorationLog,
    estimates: &[SafeSetEstimate],
    projection: ProjectionMode,
    opts: &RunOptions,
) -> Result<RunRecord, OptimizerError> {
    check_inputs(scenario, topology, schedule, exploration, estimates)?;
    if schedule.consensus_rounds != topology.diameter() {
        return Err(OptimizerError::ScheduleInvalid(format!(
            "non-convex schedule needs D_G = {} consensus rounds, got {}",
            topology.diameter(),
            schedule.consensus_rounds
        )));
    }
    let a_hats: Vec<_> = estimates.iter().map(|e| e.a_hat.clone()).collect();
    let agreed = network::max_consensus(&a_hats, topology)?;
    let shared = &estimates[agreed.owner];
    let set = robust_sets(scenario, &[shared], projection)?.remove(0);
    let sets = vec![set; topology.agents()];
    run_rounds(scenario, topology, schedule, exploration, &sets, Mode::Nonconvex, Some(agreed.owner), opts)
}

#[allow(clippy::too_many_arguments)]
fn run_rounds(
    scenario: &Scenario,
    topology: &NetworkTopology,
    schedule: &Schedule,
    exploration: &ExplorationLog,
    sets: &[RobustSafeSet],
    mode: Mode,
    shared_owner: Option<usize>,
    opts: &RunOptions,
) -> Result<RunRecord, OptimizerError> {
    let seq = &scenario.losses;
    let (m, d, horizon) = (topology.agents(), seq.d, schedule.horizon);
    let start = schedule.start();
    let eta = schedule.eta;

    let shadow = match &opts.shadow {
        Some(s) => {
            if s.lo.len() != d || s.hi.len() != d {
                return Err(OptimizerError::ShadowUnavailable);
            }
            Some((s, seq.mirror.q(&s.lo), seq.mirror.q(&s.hi)))
        }
        None => None,
    };

    let mut rec = RunRecord {
        mode,
        m,
        d,
        schedule: *schedule,
        actions: Vec::with_capacity(horizon * m * d),
        local_losses: Vec::with_capacity(horizon * m),
        global_losses: Vec::with_capacity(horizon * m),
        feasible: Vec::with_capacity(horizon * m),
        disagreement: Vec::with_capacity(horizon),
        deviation: shadow.as_ref().map(|_| Vec::with_capacity(horizon * m)),
        projections: Vec::new(),
        radii: sets.iter().map(|s| s.radius).collect(),
        shared_owner,
    };

    // identical initialisation at the baseline
    let mut states: Vec<AgentState> = (0..m)
        .map(|_| AgentState {
            x: scenario.baseline.clone(),
            y: scenario.baseline.clone(),
            u: shadow.as_ref().map(|_| seq.mirror.q(&scenario.baseline)),
            z: None,
        })
        .collect();

    for t in 0..horizon {
        let xs: Vec<DVector<f64>> = match schedule.phase(t) {
            Phase::Explore => exploration.agents.iter().map(|a| a.actions[t].clone()).collect(),
            Phase::Estimate | Phase::Consensus => vec![scenario.baseline.clone(); m],
            Phase::Optimize => states.iter().map(|s| s.x.clone()).collect(),
        };

        let evals: Vec<(f64, f64, bool)> = xs
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                (
                    seq.local_loss(i, t, x),
                    seq.global_loss(t, x),
                    scenario.truth.min_slack(x) >= -FEASIBILITY_TOL,
                )
            })
            .collect();
        for x in &xs {
            rec.actions.extend(x.iter());
        }
        for &(l, g, f) in &evals {
            rec.local_losses.push(l);
            rec.global_losses.push(g);
            rec.feasible.push(f);
        }
        rec.disagreement.push(max_spread(&xs));

        if let Some(dev) = rec.deviation.as_mut() {
            for (i, x) in xs.iter().enumerate() {
                let value = match (&states[i].u, t >= start) {
                    (Some(u), true) => (seq.mirror.q(x) - u).norm(),
                    _ => 0.0,
                };
                dev.push(value);
            }
        }

        if t < start {
            continue;
        }

        let steps: Vec<Projected> = xs
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let g = seq.local_gradient(i, t, x);
                ogd_local_step(x, &g, eta, &sets[i], opts.tol, opts.max_iter)
            })
            .collect::<Result<_, _>>()
            .map_err(|source| OptimizerError::Geometry { t, source })?;
        if opts.trace_projections {
            rec.projections.extend(steps.iter().enumerate().map(|(i, p)| ProjectionTraceRow {
                t,
                agent: i,
                iterations: p.iterations,
                residual: p.residual,
            }));
        }
        let ys: Vec<DVector<f64>> = steps.into_iter().map(|p| p.point).collect();
        let next = network::mix_step(&ys, topology)?;

        if let Some((opts_s, ulo, uhi)) = &shadow {
            let zs: Vec<DVector<f64>> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let u = if opts_s.resync {
                        seq.mirror.q(&xs[i])
                    } else {
                        states[i].u.clone().expect("shadow iterate")
                    };
                    let g = seq.mirror_gradient(i, t, &u);
                    omd_local_step(&u, &g, eta, seq.mirror, ulo, uhi)
                })
                .collect::<Result<_, _>>()?;
            let us = network::mix_step(&zs, topology)?;
            for (s, (z, u)) in states.iter_mut().zip(zs.into_iter().zip(us)) {
                s.z = Some(z);
                s.u = Some(u);
            }
        }
        for (s, (y, x)) in states.iter_mut().zip(ys.into_iter().zip(next)) {
            s.y = y;
            s.x = x;
        }
    }
    Ok(rec)
}
