//! Regret, safety and scaling-fit metrics. All of them are pure functions of
//! a [`RunRecord`] and a [`MinimizerTrace`].

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::HarnessError;
use crate::geometry::Polytope;
use crate::losses::MinimizerTrace;
use crate::optimizer::{RunRecord, FEASIBILITY_TOL};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = CompensatedSum::default();
    for v in values {
        s.add(v);
    }
    s.value()
}

/// Regret of one agent, split as
/// I = non-optimisation rounds against `x*_t`,
/// II = optimisation rounds against `x̃*_t`,
/// III = `f_t(x̃*_t) − f_t(x*_t)` over the optimisation rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentRegret {
    pub agent: usize,
    pub total: f64,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
}

impl AgentRegret {
    pub fn decomposition_residual(&self) -> f64 {
        (self.term_i + self.term_ii + self.term_iii - self.total).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub agents: Vec<AgentRegret>,
    pub path_length: f64,
    pub violation_count: usize,
    /// Whether `x̃*_t` was available; without it Term III is zero.
    pub shrunk_comparator: bool,
}

impl RegretReport {
    pub fn mean_regret(&self) -> f64 {
        compensated_sum(self.agents.iter().map(|a| a.total)) / self.agents.len() as f64
    }

    pub fn max_regret(&self) -> f64 {
        self.agents.iter().map(|a| a.total).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_term_i(&self) -> f64 {
        compensated_sum(self.agents.iter().map(|a| a.term_i)) / self.agents.len() as f64
    }

    pub fn max_decomposition_residual(&self) -> f64 {
        self.agents.iter().map(AgentRegret::decomposition_residual).fold(0.0, f64::max)
    }
}

/// Individual regret `Σ_t [f_t(x_{j,t}) − f_t(x*_t)]` for every agent.
pub fn compute_regret(record: &RunRecord, trace: &MinimizerTrace) -> Result<RegretReport, HarnessError> {
    let horizon = record.horizon();
    if trace.horizon() != horizon || record.global_losses.len() != horizon * record.m {
        return Err(HarnessError::HorizonMismatch { record: horizon, trace: trace.horizon() });
    }
    let start = record.schedule.start().min(horizon);
    let tilde = trace.shrunk.as_ref().map(|s| &s.values).unwrap_or(&trace.optimal_values);
    let term_iii = compensated_sum((start..horizon).map(|t| tilde[t] - trace.optimal_values[t]));
    let agents = (0..record.m)
        .map(|j| {
            let total = compensated_sum((0..horizon).map(|t| record.global_loss(t, j) - trace.optimal_values[t]));
            let term_i = compensated_sum((0..start).map(|t| record.global_loss(t, j) - trace.optimal_values[t]));
            let term_ii = compensated_sum((start..horizon).map(|t| record.global_loss(t, j) - tilde[t]));
            AgentRegret { agent: j, total, term_i, term_ii, term_iii }
        })
        .collect();
    Ok(RegretReport {
        agents,
        path_length: trace.path_length,
        violation_count: record.feasible.iter().filter(|f| !**f).count(),
        shrunk_comparator: trace.shrunk.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyAudit {
    pub violations: usize,
    /// Smallest constraint slack over every action of every agent.
    pub worst_slack: f64,
    /// First violating `(t, agent)`, if any.
    pub first_violation: Option<(usize, usize)>,
}

/// Counts actions with any slack below `−1e-9` against the true polytope.
pub fn safety_audit(record: &RunRecord, truth: &Polytope) -> SafetyAudit {
    let mut audit = SafetyAudit { violations: 0, worst_slack: f64::INFINITY, first_violation: None };
    for t in 0..record.horizon() {
        for i in 0..record.m {
            let s = truth.min_slack(&record.action(t, i));
            audit.worst_slack = audit.worst_slack.min(s);
            if s < -FEASIBILITY_TOL {
                audit.violations += 1;
                audit.first_violation.get_or_insert((t, i));
            }
        }
    }
    audit
}

/// OLS fit of `log y = intercept + slope · log x` with a 95% interval on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let (ci_low, ci_high) = if lx.len() > 2 {
        let se = (sse / (n - 2.0) / sxx).sqrt();
        let q = StudentsT::new(0.0, 1.0, n - 2.0).ok()?.inverse_cdf(0.975);
        (slope - q * se, slope + q * se)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Some(PowerFit { slope, intercept, ci_low, ci_high, r_squared })
}
