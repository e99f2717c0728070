//! Time-varying loss families, hindsight minimisers, path length and the
//! mirror-map machinery used by the non-convex mode.
//!
//! Rounds are 0-based throughout the library (`t ∈ 0..T`); CSV outputs add one.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, GeometryError, Polytope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("targets leave the admissible region at round {0}")]
    TargetsOutsideSafeSet(usize),
    #[error("non-convex scenarios need a box inside the positive orthant")]
    DomainNotPositive,
    #[error("point outside the mirror-map domain")]
    DomainViolation,
    #[error("hindsight minimiser did not converge")]
    NoConvergence,
    #[error("round {t} is outside the horizon {horizon}")]
    RoundOutOfRange { t: usize, horizon: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A reparameterisation `q` paired with a mirror potential `φ` satisfying
/// `[∇²φ(q(x))]⁻¹ = J_q(x) J_q(x)ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorMap {
    /// `q(x) = x²/4` with negative entropy `φ(u) = Σ u log u − u`.
    #[default]
    Entropy,
    /// `q(x) = x` with `φ(u) = ½‖u‖²`; collapses OMD to OGD.
    Euclidean,
}

impl MirrorMap {
    pub fn q(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Entropy => x.map(|v| v * v / 4.0),
            Self::Euclidean => x.clone(),
        }
    }

    pub fn q_inverse(&self, u: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Entropy => u.map(|v| 2.0 * v.max(0.0).sqrt()),
            Self::Euclidean => u.clone(),
        }
    }

    /// Diagonal of `J_q(x)`.
    pub fn jacobian_diag(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Entropy => x / 2.0,
            Self::Euclidean => DVector::from_element(x.len(), 1.0),
        }
    }

    pub fn in_domain(&self, u: &DVector<f64>) -> bool {
        match self {
            Self::Entropy => u.iter().all(|&v| v > 0.0 && v.is_finite()),
            Self::Euclidean => u.iter().all(|v| v.is_finite()),
        }
    }

    pub fn phi(&self, u: &DVector<f64>) -> Result<f64, LossError> {
        self.check(u)?;
        Ok(match self {
            Self::Entropy => u.iter().map(|&v| v * v.ln() - v).sum(),
            Self::Euclidean => 0.5 * u.norm_squared(),
        })
    }

    pub fn grad_phi(&self, u: &DVector<f64>) -> Result<DVector<f64>, LossError> {
        self.check(u)?;
        Ok(match self {
            Self::Entropy => u.map(f64::ln),
            Self::Euclidean => u.clone(),
        })
    }

    /// Diagonal of `∇²φ(u)`.
    pub fn hessian_diag(&self, u: &DVector<f64>) -> Result<DVector<f64>, LossError> {
        self.check(u)?;
        Ok(match self {
            Self::Entropy => u.map(|v| 1.0 / v),
            Self::Euclidean => DVector::from_element(u.len(), 1.0),
        })
    }

    /// Unconstrained mirror step: `∇φ(z) = ∇φ(u) − η g`.
    pub fn mirror_step(&self, u: &DVector<f64>, g: &DVector<f64>, eta: f64) -> Result<DVector<f64>, LossError> {
        self.check(u)?;
        Ok(match self {
            Self::Entropy => u.zip_map(g, |v, gj| v * (-eta * gj).exp()),
            Self::Euclidean => u - g * eta,
        })
    }

    fn check(&self, u: &DVector<f64>) -> Result<(), LossError> {
        if self.in_domain(u) {
            Ok(())
        } else {
            Err(LossError::DomainViolation)
        }
    }
}

/// `D_φ(u, z) = φ(u) − φ(z) − ∇φ(z)ᵀ(u − z)`.
pub fn bregman(mirror: MirrorMap, u: &DVector<f64>, z: &DVector<f64>) -> Result<f64, LossError> {
    if u.len() != z.len() {
        return Err(LossError::DomainViolation);
    }
    match mirror {
        // summed per coordinate to avoid cancellation between φ(u) and φ(z)
        MirrorMap::Entropy => {
            mirror.check(u)?;
            mirror.check(z)?;
            Ok(u.iter().zip(z.iter()).map(|(&a, &b)| a * (a / b).ln() - a + b).sum())
        }
        MirrorMap::Euclidean => Ok(0.5 * (u - z).norm_squared()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    ConvexTracking,
    NonconvexReparameterized,
}

/// How the global target centre moves between rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Drift {
    Static,
    /// Unit-direction random walk with the given step length.
    RandomWalk { step: f64 },
    /// Alternates between the start point and `start + amplitude·e₁`.
    Switching { switch_every: usize, amplitude: f64 },
}

impl Default for Drift {
    fn default() -> Self {
        Self::Static
    }
}

/// Generator parameters shared by both families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub d: usize,
    pub m: usize,
    pub horizon: usize,
    #[serde(default)]
    pub drift: Drift,
    /// Norm of the per-agent target offsets around the common centre.
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Fixed start for the centre; drawn from the region when absent.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
}

fn default_spread() -> f64 {
    0.2
}

/// Closed-form constants recorded with a loss sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConstants {
    /// `G`: bound on `‖∇f_{i,t}‖` over the true safe set.
    pub gradient_bound: f64,
    /// `G_F`: bound on `‖∇f̃_{i,t}‖` over `q(X)` (non-convex kind only).
    pub mirror_gradient_bound: Option<f64>,
    /// `W`: Lipschitz constant of `q` on `X`.
    pub q_lipschitz: Option<f64>,
    /// `D′`: Bregman diameter of `q(X)`.
    pub bregman_diameter: Option<f64>,
}

/// Per-agent quadratic losses over a horizon.
///
/// Convex kind: `f_{i,t}(x) = ½‖x − θ_{i,t}‖²`.
/// Non-convex kind: `f_{i,t}(x) = f̃_{i,t}(q(x))` with `f̃_{i,t}(u) = ½‖u − ψ_{i,t}‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSequence {
    pub kind: LossKind,
    pub mirror: MirrorMap,
    pub m: usize,
    pub d: usize,
    pub horizon: usize,
    /// `[t][i][j]` flattened.
    targets: Vec<f64>,
    /// Box `[lo, hi]` of the non-convex domain.
    pub domain_box: Option<(DVector<f64>, DVector<f64>)>,
    pub constants: LossConstants,
}

impl LossSequence {
    /// Builds a sequence from explicit targets `targets[t][i]`.
    pub fn from_targets(
        kind: LossKind,
        mirror: MirrorMap,
        targets: &[Vec<DVector<f64>>],
        domain_box: Option<(DVector<f64>, DVector<f64>)>,
        region: &Polytope,
    ) -> Self {
        let horizon = targets.len();
        let m = targets.first().map_or(0, Vec::len);
        let d = region.dim();
        let flat = targets.iter().flat_map(|r| r.iter().flat_map(|v| v.iter().copied())).collect();
        let mut seq = Self {
            kind,
            mirror,
            m,
            d,
            horizon,
            targets: flat,
            domain_box,
            constants: LossConstants {
                gradient_bound: 0.0,
                mirror_gradient_bound: None,
                q_lipschitz: None,
                bregman_diameter: None,
            },
        };
        seq.constants = seq.compute_constants(region);
        seq
    }

    fn offset(&self, i: usize, t: usize) -> usize {
        (t * self.m + i) * self.d
    }

    /// `θ_{i,t}` (convex) or `ψ_{i,t}` (non-convex, in `u`-space).
    pub fn target(&self, i: usize, t: usize) -> DVector<f64> {
        let o = self.offset(i, t);
        DVector::from_column_slice(&self.targets[o..o + self.d])
    }

    pub fn mean_target(&self, t: usize) -> DVector<f64> {
        let mut acc = DVector::zeros(self.d);
        for i in 0..self.m {
            let o = self.offset(i, t);
            for j in 0..self.d {
                acc[j] += self.targets[o + j];
            }
        }
        acc / self.m as f64
    }

    fn feature(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            LossKind::ConvexTracking => x.clone(),
            LossKind::NonconvexReparameterized => self.mirror.q(x),
        }
    }

    pub fn local_loss(&self, i: usize, t: usize, x: &DVector<f64>) -> f64 {
        let o = self.offset(i, t);
        let u = self.feature(x);
        0.5 * u.iter().zip(&self.targets[o..o + self.d]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    /// `∇f_{i,t}(x)`; chain rule `J_qᵀ ∇f̃(q(x))` for the non-convex kind.
    pub fn local_gradient(&self, i: usize, t: usize, x: &DVector<f64>) -> DVector<f64> {
        let o = self.offset(i, t);
        let residual =
            DVector::from_fn(self.d, |j, _| self.feature_coord(x, j) - self.targets[o + j]);
        match self.kind {
            LossKind::ConvexTracking => residual,
            LossKind::NonconvexReparameterized => residual.component_mul(&self.mirror.jacobian_diag(x)),
        }
    }

    fn feature_coord(&self, x: &DVector<f64>, j: usize) -> f64 {
        match (self.kind, self.mirror) {
            (LossKind::NonconvexReparameterized, MirrorMap::Entropy) => x[j] * x[j] / 4.0,
            _ => x[j],
        }
    }

    /// `f̃_{i,t}(u)`; equals `f_{i,t}` for the convex kind.
    pub fn mirror_loss(&self, i: usize, t: usize, u: &DVector<f64>) -> f64 {
        let o = self.offset(i, t);
        0.5 * u.iter().zip(&self.targets[o..o + self.d]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    /// `∇f̃_{i,t}(u) = u − ψ_{i,t}`.
    pub fn mirror_gradient(&self, i: usize, t: usize, u: &DVector<f64>) -> DVector<f64> {
        u - self.target(i, t)
    }

    /// Global loss `f_t = Σ_i f_{i,t}`.
    pub fn global_loss(&self, t: usize, x: &DVector<f64>) -> f64 {
        (0..self.m).map(|i| self.local_loss(i, t, x)).sum()
    }

    pub fn global_gradient(&self, t: usize, x: &DVector<f64>) -> DVector<f64> {
        (0..self.m).fold(DVector::zeros(self.d), |acc, i| acc + self.local_gradient(i, t, x))
    }

    fn compute_constants(&self, region: &Polytope) -> LossConstants {
        match self.kind {
            LossKind::ConvexTracking => {
                // ‖x − θ‖ is convex in x, so its maximum over X sits at a vertex
                let verts = region.vertices();
                let mut g = 0.0_f64;
                for t in 0..self.horizon {
                    for i in 0..self.m {
                        let th = self.target(i, t);
                        for v in &verts {
                            g = g.max((v - &th).norm());
                        }
                    }
                }
                LossConstants {
                    gradient_bound: g,
                    mirror_gradient_bound: None,
                    q_lipschitz: None,
                    bregman_diameter: None,
                }
            }
            LossKind::NonconvexReparameterized => self.nonconvex_constants(),
        }
    }

    fn nonconvex_constants(&self) -> LossConstants {
        let (lo, hi) = self.domain_box.clone().expect("non-convex sequences carry a box");
        let ulo = self.mirror.q(&lo);
        let uhi = self.mirror.q(&hi);
        let d = self.d;
        let mut psi_min = DVector::from_element(d, f64::INFINITY);
        let mut psi_max = DVector::from_element(d, f64::NEG_INFINITY);
        for t in 0..self.horizon {
            for i in 0..self.m {
                let o = self.offset(i, t);
                for j in 0..d {
                    psi_min[j] = psi_min[j].min(self.targets[o + j]);
                    psi_max[j] = psi_max[j].max(self.targets[o + j]);
                }
            }
        }
        let mut g2 = 0.0;
        let mut gf2 = 0.0;
        let mut w = 0.0_f64;
        let mut dprime = 0.0;
        for j in 0..d {
            // |J_q(x)_j (q(x)_j − ψ_j)| over x ∈ [lo, hi], ψ ∈ [ψmin, ψmax]:
            // linear in ψ, so check both ψ extremes at the x-endpoints and at
            // the stationary points of the cubic.
            let mut best = 0.0_f64;
            for psi in [psi_min[j], psi_max[j]] {
                let mut xs = vec![lo[j], hi[j]];
                if self.mirror == MirrorMap::Entropy && psi > 0.0 {
                    let crit = (4.0 * psi / 3.0).sqrt();
                    if crit > lo[j] && crit < hi[j] {
                        xs.push(crit);
                    }
                }
                for x in xs {
                    let xv = DVector::from_element(1, x);
                    let jac = self.mirror.jacobian_diag(&xv)[0];
                    let qx = self.mirror.q(&xv)[0];
                    best = best.max((jac * (qx - psi)).abs());
                }
            }
            g2 += best * best;
            let gf = [ulo[j] - psi_max[j], uhi[j] - psi_min[j]].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            gf2 += gf * gf;
            w = w.max(self.mirror.jacobian_diag(&hi)[j].abs().max(self.mirror.jacobian_diag(&lo)[j].abs()));
            let ends = [ulo[j], uhi[j]];
            let mut dj = 0.0_f64;
            for &a in &ends {
                for &b in &ends {
                    let (av, bv) = (DVector::from_element(1, a), DVector::from_element(1, b));
                    dj = dj.max(bregman(self.mirror, &av, &bv).unwrap_or(f64::INFINITY));
                }
            }
            dprime += dj;
        }
        LossConstants {
            gradient_bound: g2.sqrt(),
            mirror_gradient_bound: Some(gf2.sqrt()),
            q_lipschitz: Some(w),
            bregman_diameter: Some(dprime),
        }
    }
}

fn random_point_in<R: Rng + ?Sized>(region: &Polytope, rng: &mut R) -> Option<DVector<f64>> {
    let verts = region.vertices();
    let d = region.dim();
    let lo = DVector::from_fn(d, |j, _| verts.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min));
    let hi = DVector::from_fn(d, |j, _| verts.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max));
    (0..10_000).find_map(|_| {
        let p = DVector::from_fn(d, |j, _| rng.random_range(lo[j]..=hi[j]));
        (region.min_slack(&p) > 0.0).then_some(p)
    })
}

fn unit_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let n: f64 = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Centre path `c_0, …, c_{T−1}` inside `region` under `drift`.
fn centre_path<R: Rng + ?Sized>(
    params: &FamilyParams,
    region: &Polytope,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>, LossError> {
    let start = match &params.start {
        Some(s) => DVector::from_column_slice(s),
        None => random_point_in(region, rng).ok_or(LossError::TargetsOutsideSafeSet(0))?,
    };
    if region.min_slack(&start) < 0.0 {
        return Err(LossError::TargetsOutsideSafeSet(0));
    }
    let mut path = Vec::with_capacity(params.horizon);
    let mut c = start.clone();
    for t in 0..params.horizon {
        if t > 0 {
            match params.drift {
                Drift::Static => {}
                Drift::RandomWalk { step } => {
                    // resample the direction until the step stays inside
                    for _ in 0..64 {
                        let cand = &c + unit_direction(params.d, rng) * step;
                        if region.min_slack(&cand) >= 0.0 {
                            c = cand;
                            break;
                        }
                    }
                }
                Drift::Switching { switch_every, amplitude } => {
                    let phase = (t / switch_every.max(1)) % 2;
                    c = start.clone();
                    if phase == 1 {
                        c[0] += amplitude;
                    }
                }
            }
        }
        if region.min_slack(&c) < 0.0 {
            return Err(LossError::TargetsOutsideSafeSet(t));
        }
        path.push(c.clone());
    }
    Ok(path)
}

/// Zero-sum per-agent offsets with norm `spread` (up to the centring shift).
fn agent_offsets<R: Rng + ?Sized>(m: usize, d: usize, spread: f64, rng: &mut R) -> Vec<DVector<f64>> {
    let raw: Vec<DVector<f64>> = (0..m).map(|_| unit_direction(d, rng) * spread).collect();
    if m == 1 {
        return vec![DVector::zeros(d)];
    }
    let mean = raw.iter().fold(DVector::zeros(d), |a, v| a + v) / m as f64;
    raw.into_iter().map(|v| v - &mean).collect()
}

/// Quadratic tracking losses whose global minimiser (the mean target)
/// follows a drifting centre inside `region`.
pub fn make_convex_tracking<R: Rng + ?Sized>(
    params: &FamilyParams,
    region: &Polytope,
    truth: &Polytope,
    rng: &mut R,
) -> Result<LossSequence, LossError> {
    let centres = centre_path(params, region, rng)?;
    let offsets = agent_offsets(params.m, params.d, params.spread, rng);
    let targets: Vec<Vec<DVector<f64>>> = centres
        .iter()
        .map(|c| offsets.iter().map(|o| c + o).collect())
        .collect();
    Ok(LossSequence::from_targets(LossKind::ConvexTracking, MirrorMap::Entropy, &targets, None, truth))
}

/// `f_{i,t}(x) = ½‖q(x) − ψ_{i,t}‖²` on a positive box `[lo, hi]`. The
/// centre drifts inside `q(shrunk box)`, expressed in `u`-space.
pub fn make_nonconvex_family<R: Rng + ?Sized>(
    params: &FamilyParams,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    margin: f64,
    mirror: MirrorMap,
    rng: &mut R,
) -> Result<LossSequence, LossError> {
    if mirror == MirrorMap::Entropy && lo.iter().any(|&v| v <= 0.0) {
        return Err(LossError::DomainNotPositive);
    }
    if lo.iter().zip(hi.iter()).any(|(a, b)| a >= b) {
        return Err(LossError::DomainNotPositive);
    }
    let inner_lo = lo.add_scalar(margin);
    let inner_hi = hi.add_scalar(-margin);
    let u_region = Polytope::bounding_box(mirror.q(&inner_lo).as_slice(), mirror.q(&inner_hi).as_slice());
    let centres = centre_path(params, &u_region, rng)?;
    let offsets = agent_offsets(params.m, params.d, params.spread, rng);
    let targets: Vec<Vec<DVector<f64>>> = centres
        .iter()
        .map(|c| offsets.iter().map(|o| c + o).collect())
        .collect();
    let truth = Polytope::bounding_box(lo.as_slice(), hi.as_slice());
    Ok(LossSequence::from_targets(
        LossKind::NonconvexReparameterized,
        mirror,
        &targets,
        Some((lo.clone(), hi.clone())),
        &truth,
    ))
}

/// `x*_t = argmin_{x ∈ X} Σ_i f_{i,t}(x)`.
pub fn hindsight_minimizer(
    seq: &LossSequence,
    t: usize,
    truth: &Polytope,
    tol: f64,
) -> Result<DVector<f64>, LossError> {
    if t >= seq.horizon {
        return Err(LossError::RoundOutOfRange { t, horizon: seq.horizon });
    }
    match seq.kind {
        LossKind::ConvexTracking => {
            // Σ_i ½‖x − θ_i‖² has Hessian m·I; step 1/m
            let step = 1.0 / seq.m as f64;
            let mut x = geometry::project_polytope(truth, &seq.mean_target(t), tol * 1e-2, geometry::DEFAULT_MAX_ITER)?;
            for _ in 0..10_000 {
                let next = geometry::project_polytope(
                    truth,
                    &(&x - seq.global_gradient(t, &x) * step),
                    tol * 1e-2,
                    geometry::DEFAULT_MAX_ITER,
                )?;
                let mapping = (&x - &next).norm() / step;
                x = next;
                if mapping <= tol {
                    return Ok(x);
                }
            }
            Err(LossError::NoConvergence)
        }
        LossKind::NonconvexReparameterized => {
            let (lo, hi) = seq.domain_box.as_ref().ok_or(LossError::DomainNotPositive)?;
            let ulo = seq.mirror.q(lo);
            let uhi = seq.mirror.q(hi);
            // separable quadratic over a box: clamp the mean target
            let u = DVector::from_fn(seq.d, |j, _| seq.mean_target(t)[j].clamp(ulo[j], uhi[j]));
            Ok(seq.mirror.q_inverse(&u))
        }
    }
}

/// Hindsight minimisers and their path length, plus the comparator values
/// the regret report needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerTrace {
    pub x_star: Vec<DVector<f64>>,
    /// `f_t(x*_t)`.
    pub optimal_values: Vec<f64>,
    pub path_length: f64,
    /// `x̃*_t` (projection onto the mutual shrunk polytope) and `f_t(x̃*_t)`.
    pub shrunk: Option<ShrunkComparator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShrunkComparator {
    pub tau_in: f64,
    pub points: Vec<DVector<f64>>,
    pub values: Vec<f64>,
}

impl MinimizerTrace {
    pub fn from_points(x_star: Vec<DVector<f64>>, optimal_values: Vec<f64>) -> Self {
        let path_length = path_length_of(&x_star);
        Self { x_star, optimal_values, path_length, shrunk: None }
    }

    pub fn horizon(&self) -> usize {
        self.x_star.len()
    }

    /// `C*_t` for every prefix.
    pub fn cumulative_path(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.x_star.len());
        for t in 0..self.x_star.len() {
            if t > 0 {
                acc += (&self.x_star[t] - &self.x_star[t - 1]).norm();
            }
            out.push(acc);
        }
        out
    }
}

fn path_length_of(points: &[DVector<f64>]) -> f64 {
    points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

/// `C*_T = Σ_{t≥2} ‖x*_t − x*_{t−1}‖`.
pub fn path_length(trace: &MinimizerTrace) -> f64 {
    path_length_of(&trace.x_star)
}

/// Comparator trace for the whole horizon.
pub fn minimizer_trace(seq: &LossSequence, truth: &Polytope, tol: f64) -> Result<MinimizerTrace, LossError> {
    let mut xs = Vec::with_capacity(seq.horizon);
    let mut vals = Vec::with_capacity(seq.horizon);
    for t in 0..seq.horizon {
        let x = hindsight_minimizer(seq, t, truth, tol)?;
        vals.push(seq.global_loss(t, &x));
        xs.push(x);
    }
    Ok(MinimizerTrace::from_points(xs, vals))
}

/// Attaches `x̃*_t = Π_{X_in}(x*_t)` for the shrunk polytope `X_in` with offset `τ_in`.
pub fn attach_shrunk_comparator(
    trace: &mut MinimizerTrace,
    seq: &LossSequence,
    truth: &Polytope,
    tau_in: f64,
    probe: Option<&DVector<f64>>,
) -> Result<(), LossError> {
    let inner = geometry::shrink_polytope(truth, tau_in, probe)?;
    let mut points = Vec::with_capacity(trace.horizon());
    let mut values = Vec::with_capacity(trace.horizon());
    for (t, x) in trace.x_star.iter().enumerate() {
        let p = geometry::project_polytope(&inner, x, geometry::DEFAULT_TOL, geometry::DEFAULT_MAX_ITER)?;
        values.push(seq.global_loss(t, &p));
        points.push(p);
    }
    trace.shrunk = Some(ShrunkComparator { tau_in, points, values });
    Ok(())
}
