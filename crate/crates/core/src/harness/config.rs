//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::estimation::{self, ExplorationConfig, NoiseModel};
use crate::geometry::{Polytope, ProjectionMode};
use crate::losses::{Drift, LossKind, MirrorMap};
use crate::network::{self, NetworkTopology, TopologyKind};
use crate::optimizer::Mode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: LossKind,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub drift: Drift,
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Start of the target centre (in `u`-space for the non-convex kind).
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    /// Axis-aligned safe set; required for the non-convex kind.
    #[serde(default, rename = "box")]
    pub safe_box: Option<BoxSpec>,
    /// General polytope `{x : A x ≤ b}`; alternative to `box`.
    #[serde(default)]
    pub polytope: Option<Polytope>,
    pub baseline: Vec<f64>,
    /// Distance the target centres keep from the safe-set boundary.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub mirror: MirrorMap,
}

fn default_spread() -> f64 {
    0.2
}

fn default_margin() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default)]
    pub kind: Option<TopologyKind>,
    /// Explicit mixing matrix, row-major.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "one")]
    pub c_eta: f64,
    #[serde(default = "one")]
    pub c0: f64,
    /// Overrides the preset step size.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Co-run the shadow mirror descent (non-convex kind on a box only).
    #[serde(default)]
    pub shadow_omd: bool,
    #[serde(default = "yes")]
    pub shadow_resync: bool,
    #[serde(default)]
    pub trace_projections: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { c_eta: 1.0, c0: 1.0, eta: None, shadow_omd: false, shadow_resync: true, trace_projections: false }
    }
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    /// Overrides `T0 = c₀ T^{2/3}`.
    #[serde(default)]
    pub t0: Option<usize>,
    /// Fixes `T1`; otherwise it is calibrated against the ridge solution.
    #[serde(default)]
    pub t1: Option<usize>,
    #[serde(default = "default_max_t1")]
    pub max_t1: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "one")]
    pub rho: f64,
    /// Observation noise scale `R`.
    #[serde(default = "default_noise_r", rename = "R")]
    pub noise_r: f64,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Defaults to `L/√d`.
    #[serde(default)]
    pub sigma_zeta: Option<f64>,
    /// Defaults to 0.99 of the largest safe value.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub projection_mode: ProjectionMode,
    /// EXTRA step size; defaults to the stability-safe choice.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            t0: None,
            t1: None,
            max_t1: default_max_t1(),
            lambda: default_lambda(),
            delta: default_delta(),
            rho: 1.0,
            noise_r: default_noise_r(),
            noise: NoiseModel::Gaussian,
            sigma_zeta: None,
            gamma: None,
            projection_mode: ProjectionMode::Conservative,
            alpha: None,
        }
    }
}

fn default_max_t1() -> usize {
    20_000
}

fn default_lambda() -> f64 {
    0.01
}

fn default_delta() -> f64 {
    0.05
}

fn default_noise_r() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Algorithm mode; defaults to the one matching the loss kind.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub scenario: ScenarioConfig,
    pub topology: TopologyConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A validated configuration with the derived objects every seed shares.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub mode: Mode,
    pub truth: Polytope,
    pub baseline: DVector<f64>,
    pub topology: NetworkTopology,
    pub gamma: f64,
    pub sigma_zeta: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the canonical (compact) JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        let canonical = serde_json::to_string(&c).expect("config serialises");
        hex(&Sha256::digest(canonical.as_bytes()))
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(match self.scenario.kind {
            LossKind::ConvexTracking => Mode::Convex,
            LossKind::NonconvexReparameterized => Mode::Nonconvex,
        })
    }

    pub fn truth(&self) -> Result<Polytope, HarnessError> {
        let s = &self.scenario;
        match (&s.safe_box, &s.polytope) {
            (Some(b), None) => {
                if b.lo.len() != s.d || b.hi.len() != s.d {
                    return Err(cfg("scenario.box: bounds must have d entries"));
                }
                if b.lo.iter().zip(&b.hi).any(|(l, h)| !(l < h)) {
                    return Err(cfg("scenario.box: need lo < hi in every coordinate"));
                }
                Ok(Polytope::bounding_box(&b.lo, &b.hi))
            }
            (None, Some(p)) => {
                if p.dim() != s.d {
                    return Err(cfg("scenario.polytope: column count differs from d"));
                }
                Ok(p.clone())
            }
            (None, None) => Err(cfg("scenario: one of `box` or `polytope` is required")),
            (Some(_), Some(_)) => Err(cfg("scenario: give either `box` or `polytope`, not both")),
        }
    }

    pub fn topology(&self) -> Result<NetworkTopology, HarnessError> {
        let m = self.scenario.m;
        let top = match (&self.topology.kind, &self.topology.matrix) {
            (Some(kind), None) => network::generate(*kind, m),
            (None, Some(rows)) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(cfg("topology.matrix: must be m x m"));
                }
                network::validate_topology(&DMatrix::from_fn(m, m, |i, j| rows[i][j]))
            }
            _ => return Err(cfg("topology: exactly one of `kind` or `matrix` is required")),
        };
        top.map_err(|e| HarnessError::Config(format!("topology: {e}")))
    }

    /// Cross-field checks plus the exploration safety conditions.
    pub fn prepare(&self) -> Result<Prepared, HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        let s = &self.scenario;
        if s.d == 0 || s.m == 0 {
            return Err(cfg("scenario: d and m must be positive"));
        }
        if s.horizon < 4 {
            return Err(cfg("scenario.T: horizon must be at least 4"));
        }
        if self.seeds.is_empty() {
            return Err(cfg("seeds: at least one seed is required"));
        }
        if s.baseline.len() != s.d {
            return Err(cfg("scenario.baseline: must have d entries"));
        }
        if s.kind == LossKind::NonconvexReparameterized && s.safe_box.is_none() {
            return Err(cfg("scenario.box: the non-convex kind needs a box safe set"));
        }
        let truth = self.truth()?;
        let topology = self.topology()?;
        let baseline = DVector::from_column_slice(&s.baseline);
        let e = &self.estimation;
        if !(e.lambda > 0.0) || !(e.delta > 0.0 && e.delta < 1.0) || !(e.rho > 0.0) || e.noise_r < 0.0 {
            return Err(cfg("estimation: need lambda > 0, 0 < delta < 1, rho > 0, R >= 0"));
        }
        let norm_bound = truth.norm_bound();
        let sigma_zeta = e.sigma_zeta.unwrap_or(norm_bound / (s.d as f64).sqrt());
        let gamma = match e.gamma {
            Some(g) => g,
            None => {
                let gap = truth.min_slack(&baseline);
                let closed_form = estimation::gamma_max(gap.max(f64::MIN_POSITIVE), norm_bound, truth.max_row_norm())
                    .map_err(|err| HarnessError::Config(format!("estimation.gamma: {err}")))?;
                0.99 * closed_form.min(estimation::exact_safe_gamma(&truth, &baseline, sigma_zeta))
            }
        };
        ExplorationConfig::new(&truth, baseline.clone(), 1, gamma, sigma_zeta)
            .map_err(|err| HarnessError::Config(format!("estimation: {err}")))?;
        Ok(Prepared {
            config: self.clone(),
            mode: self.mode(),
            truth,
            baseline,
            topology,
            gamma,
            sigma_zeta,
        })
    }
}

fn cfg(msg: &str) -> HarnessError {
    HarnessError::Config(msg.to_string())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"{
        "schema_version": 1,
        "scenario": {"kind": "convex_tracking", "d": 2, "m": 4, "T": 2000,
                     "box": {"lo": [-1, -1], "hi": [1, 1]}, "baseline": [0, 0]},
        "topology": {"kind": "ring"},
        "seeds": [1]
    }"#;

    #[test]
    fn smoke_config_prepares() {
        let c = ExperimentConfig::from_json(SMOKE).unwrap();
        let p = c.prepare().unwrap();
        assert_eq!(p.mode, Mode::Convex);
        assert!(p.gamma > 0.0 && p.gamma < 0.71);
        assert_eq!(c.hash(), ExperimentConfig::from_json(&c.to_json()).unwrap().hash());
    }

    #[test]
    fn missing_field_is_named() {
        let text = SMOKE.replace("\"d\": 2, ", "");
        let err = ExperimentConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("missing field `d`"), "{err}");
    }

    #[test]
    fn cross_field_errors() {
        let mut c = ExperimentConfig::from_json(SMOKE).unwrap();
        c.scenario.baseline = vec![0.0];
        assert!(c.prepare().is_err());
        let mut c = ExperimentConfig::from_json(SMOKE).unwrap();
        c.estimation.gamma = Some(0.9);
        assert!(matches!(c.prepare(), Err(HarnessError::Config(_))));
        let mut c = ExperimentConfig::from_json(SMOKE).unwrap();
        c.scenario.kind = LossKind::NonconvexReparameterized;
        c.scenario.safe_box = None;
        c.scenario.polytope = Some(Polytope::bounding_box(&[0.5, 0.5], &[1.5, 1.5]));
        assert!(c.prepare().is_err());
    }
}
