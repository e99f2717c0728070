//! Feasible-set representations and Euclidean projections.
//!
//! Polytopes are projected with Dykstra's alternating projection over their
//! halfspaces. Robust safe sets (rows known only up to a confidence ball)
//! come in two flavours: the exact second-order-cone reading
//! `âᵀx + r‖x‖ ≤ b`, and a conservative polytope `âᵀx ≤ b − r·L` that is an
//! inner approximation whenever `‖x‖ ≤ L`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("halfspace normal is zero")]
    ZeroNormal,
    #[error("projection did not converge within {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("constraint set is empty")]
    InfeasibleConstraintSet,
    #[error("cone-constraint projection failed to bracket the multiplier")]
    NoConvergence,
    #[error("shrinking by {tau} leaves an empty polytope")]
    EmptyShrunkSet { tau: f64 },
    #[error("polytope has {rows} rows but {offsets} offsets")]
    Malformed { rows: usize, offsets: usize },
}

/// `{x : A x ≤ b}` with `A` of shape `n × d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    #[serde(rename = "A", with = "crate::serde_mat::rows")]
    a: DMatrix<f64>,
    #[serde(with = "crate::serde_mat::vector")]
    b: DVector<f64>,
}

impl Polytope {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, GeometryError> {
        if a.nrows() != b.len() || a.nrows() == 0 || a.ncols() == 0 {
            return Err(GeometryError::Malformed { rows: a.nrows(), offsets: b.len() });
        }
        Ok(Self { a, b })
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`, rows `+e_j` then `−e_j`.
    pub fn bounding_box(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut a = DMatrix::zeros(2 * d, d);
        let mut b = DVector::zeros(2 * d);
        for j in 0..d {
            a[(j, j)] = 1.0;
            b[j] = hi[j];
            a[(d + j, j)] = -1.0;
            b[d + j] = -lo[j];
        }
        Self { a, b }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn row(&self, k: usize) -> DVector<f64> {
        self.a.row(k).transpose()
    }

    /// `b − A x`; negative entries are violations.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * x
    }

    pub fn min_slack(&self, x: &DVector<f64>) -> f64 {
        self.slack(x).min()
    }

    /// `L_A = max_k ‖a_k‖`.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.constraints()).map(|k| self.a.row(k).norm()).fold(0.0, f64::max)
    }

    /// Vertices by enumerating every `d`-subset of rows. Intended for the
    /// small polytopes used in scenarios.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let (n, d) = (self.constraints(), self.dim());
        let mut out: Vec<DVector<f64>> = Vec::new();
        for subset in combinations(n, d) {
            let sub = DMatrix::from_fn(d, d, |r, c| self.a[(subset[r], c)]);
            let rhs = DVector::from_fn(d, |r, _| self.b[subset[r]]);
            let Some(x) = sub.lu().solve(&rhs) else { continue };
            if x.iter().all(|v| v.is_finite())
                && self.min_slack(&x) >= -1e-9
                && !out.iter().any(|v| (v - &x).norm() < 1e-9)
            {
                out.push(x);
            }
        }
        out
    }

    /// `L = max ‖x‖` over the polytope, attained at a vertex.
    pub fn norm_bound(&self) -> f64 {
        self.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Same rows, offsets lowered by `tau`.
    pub fn with_offsets_lowered(&self, tau: f64) -> Self {
        Self { a: self.a.clone(), b: self.b.add_scalar(-tau) }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    ExactCone,
    #[default]
    Conservative,
}

impl std::str::FromStr for ProjectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact_cone" => Ok(Self::ExactCone),
            "conservative" => Ok(Self::Conservative),
            other => Err(format!("unknown projection mode `{other}`")),
        }
    }
}

/// Per-agent estimated feasible region: every row of `a_hat` may be off by up
/// to `radius` in Euclidean norm, so each constraint is robustified against
/// the whole confidence ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSafeSet {
    #[serde(with = "crate::serde_mat::rows")]
    pub a_hat: DMatrix<f64>,
    #[serde(with = "crate::serde_mat::vector")]
    pub b: DVector<f64>,
    pub radius: f64,
    pub mode: ProjectionMode,
    /// `L`, used by the conservative tightening.
    pub norm_bound: f64,
}

impl RobustSafeSet {
    pub fn dim(&self) -> usize {
        self.a_hat.ncols()
    }

    /// The polytope `{â_kᵀx ≤ b_k − r·L}`.
    pub fn conservative_polytope(&self) -> Polytope {
        Polytope { a: self.a_hat.clone(), b: self.b.add_scalar(-self.radius * self.norm_bound) }
    }

    /// Per-row slack under the set's own mode.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.mode {
            ProjectionMode::ExactCone => {
                let nx = x.norm();
                &self.b - &self.a_hat * x - DVector::from_element(self.b.len(), self.radius * nx)
            }
            ProjectionMode::Conservative => self.conservative_polytope().slack(x),
        }
    }
}

/// Membership with slack tolerance.
pub trait Membership {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError>;
}

impl Membership for Polytope {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
        check_dim(self.dim(), x)?;
        Ok(self.min_slack(x) >= -tol)
    }
}

impl Membership for RobustSafeSet {
    fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
        check_dim(self.dim(), x)?;
        Ok(self.slack(x).min() >= -tol)
    }
}

fn check_dim(expected: usize, x: &DVector<f64>) -> Result<(), GeometryError> {
    if x.len() != expected {
        return Err(GeometryError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// Projection of `z` onto `{x : aᵀx ≤ b}`.
pub fn project_halfspace(
    a: &DVector<f64>,
    b: f64,
    z: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    check_dim(a.len(), z)?;
    let nn = a.norm_squared();
    if nn == 0.0 {
        return Err(GeometryError::ZeroNormal);
    }
    let excess = a.dot(z) - b;
    if excess <= 0.0 {
        return Ok(z.clone());
    }
    Ok(z - a * (excess / nn))
}

/// A projected point plus the solver effort that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub point: DVector<f64>,
    pub iterations: usize,
    /// Largest constraint violation at `point` (0 when feasible).
    pub residual: f64,
}

impl Projected {
    fn identity(z: &DVector<f64>) -> Self {
        Self { point: z.clone(), iterations: 0, residual: 0.0 }
    }
}

/// Dykstra projection of `z` onto `poly`.
pub fn project_polytope(
    poly: &Polytope,
    z: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>, GeometryError> {
    project_polytope_traced(poly, z, tol, max_iter).map(|p| p.point)
}

pub fn project_polytope_traced(
    poly: &Polytope,
    z: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Projected, GeometryError> {
    check_dim(poly.dim(), z)?;
    let n = poly.constraints();
    if poly.min_slack(z) >= 0.0 {
        return Ok(Projected::identity(z));
    }
    let rows: Vec<DVector<f64>> = (0..n).map(|k| poly.row(k)).collect();
    if let Some(r) = rows.iter().position(|r| r.norm_squared() == 0.0) {
        if poly.b[r] < 0.0 {
            return Err(GeometryError::InfeasibleConstraintSet);
        }
    }
    let mut x = z.clone();
    // Dykstra increments are parallel to each normal; store the scalar.
    let mut mult = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let x_prev = x.clone();
        let mut mult_change = 0.0_f64;
        for k in 0..n {
            let nn = rows[k].norm_squared();
            if nn == 0.0 {
                continue;
            }
            // y = x + mult_k a_k; project y onto halfspace k
            let ay = rows[k].dot(&x) + mult[k] * nn;
            let new_mult = ((ay - poly.b[k]) / nn).max(0.0);
            x.axpy(mult[k] - new_mult, &rows[k], 1.0);
            mult_change = mult_change.max((new_mult - mult[k]).abs() * nn.sqrt());
            mult[k] = new_mult;
        }
        let change = (&x - &x_prev).norm();
        let violation = (-poly.min_slack(&x)).max(0.0);
        if change <= tol * 1e-2 && mult_change <= tol && violation <= tol {
            converged = true;
            break;
        }
    }
    let residual = (-poly.min_slack(&x)).max(0.0);
    if !converged {
        // nearly parallel faces can stall Dykstra; small systems are solved exactly
        if let Some(point) = project_by_enumeration(poly, z) {
            return Ok(Projected { residual: (-poly.min_slack(&point)).max(0.0), point, iterations });
        }
        if residual > tol {
            return Err(GeometryError::MaxIterationsExceeded { iterations, residual });
        }
    }
    let point = polish_active_set(poly, z, &x, &mult).unwrap_or(x);
    let residual = (-poly.min_slack(&point)).max(0.0);
    Ok(Projected { point, iterations, residual })
}

/// Re-solves the projection exactly on the constraint set Dykstra left
/// active. Returns `None` if the candidate fails KKT (negative multiplier,
/// infeasible, rank-deficient active rows, or far from the Dykstra point).
fn polish_active_set(
    poly: &Polytope,
    z: &DVector<f64>,
    x: &DVector<f64>,
    mult: &[f64],
) -> Option<DVector<f64>> {
    let slack = poly.slack(x);
    let active: Vec<usize> = (0..poly.constraints())
        .filter(|&k| mult[k] > 0.0 && slack[k] <= 1e-6)
        .collect();
    if active.is_empty() || active.len() > poly.dim() {
        return None;
    }
    let s = active.len();
    let a_s = DMatrix::from_fn(s, poly.dim(), |r, c| poly.a[(active[r], c)]);
    let rhs = &a_s * z - DVector::from_fn(s, |r, _| poly.b[active[r]]);
    let gram = &a_s * a_s.transpose();
    let lambda = gram.cholesky()?.solve(&rhs);
    if lambda.iter().any(|&l| l < -1e-12) {
        return None;
    }
    let candidate = z - a_s.transpose() * lambda;
    if poly.min_slack(&candidate) < -1e-12 || (&candidate - x).norm() > 1e-5 {
        return None;
    }
    Some(candidate)
}

/// Exact projection by trying every active set of at most `d` rows and
/// keeping the first KKT point. Only used for systems with ≤ 20 rows.
fn project_by_enumeration(poly: &Polytope, z: &DVector<f64>) -> Option<DVector<f64>> {
    let (n, d) = (poly.constraints(), poly.dim());
    if n > 20 {
        return None;
    }
    let mut masks: Vec<u32> = (1u32..(1u32 << n)).filter(|m| m.count_ones() as usize <= d).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let rows: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
        let a_s = DMatrix::from_fn(rows.len(), d, |r, c| poly.a[(rows[r], c)]);
        let rhs = &a_s * z - DVector::from_fn(rows.len(), |r, _| poly.b[rows[r]]);
        let Some(lambda) = (&a_s * a_s.transpose()).cholesky().map(|c| c.solve(&rhs)) else {
            continue;
        };
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let candidate = z - a_s.transpose() * lambda;
        if poly.min_slack(&candidate) >= -1e-10 {
            return Some(candidate);
        }
    }
    None
}

/// Euclidean projection onto the single constraint `âᵀx + r‖x‖ ≤ b`.
///
/// For a fixed multiplier μ the Lagrangian minimiser is the norm-shrinkage
/// `x(μ) = max(0, 1 − μr/‖w‖)·w` with `w = z − μâ`; the residual
/// `âᵀx(μ) + r‖x(μ)‖ − b` is non-increasing in μ, so μ is found by bisection.
/// The returned point is always taken from the feasible end of the bracket.
pub fn project_cone_constraint(
    a_hat: &DVector<f64>,
    b: f64,
    radius: f64,
    z: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>, GeometryError> {
    check_dim(a_hat.len(), z)?;
    if radius < 0.0 || !radius.is_finite() {
        return Err(GeometryError::NoConvergence);
    }
    let residual = |x: &DVector<f64>| a_hat.dot(x) + radius * x.norm() - b;
    if residual(z) <= 0.0 {
        return Ok(z.clone());
    }
    if radius == 0.0 {
        return project_halfspace(a_hat, b, z);
    }
    if b < 0.0 && radius >= a_hat.norm() {
        return Err(GeometryError::InfeasibleConstraintSet);
    }
    let x_of = |mu: f64| -> DVector<f64> {
        let w = z - a_hat * mu;
        let nw = w.norm();
        if nw <= mu * radius {
            DVector::zeros(z.len())
        } else {
            w * (1.0 - mu * radius / nw)
        }
    };
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut grow = 0;
    while residual(&x_of(hi)) > 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(GeometryError::NoConvergence);
        }
    }
    let scale = a_hat.norm() + radius;
    for _ in 0..300 {
        if (hi - lo) * scale <= tol * 1e-3 || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(&x_of(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(x_of(hi))
}

/// Projection onto a robust safe set: Dykstra over the per-row cone
/// constraints (exact mode) or the tightened polytope (conservative mode).
pub fn project_robust_set(
    set: &RobustSafeSet,
    z: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>, GeometryError> {
    project_robust_set_traced(set, z, tol, max_iter).map(|p| p.point)
}

pub fn project_robust_set_traced(
    set: &RobustSafeSet,
    z: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Projected, GeometryError> {
    match set.mode {
        ProjectionMode::Conservative => {
            project_polytope_traced(&set.conservative_polytope(), z, tol, max_iter)
        }
        // a zero-radius cone is a half-space
        ProjectionMode::ExactCone if set.radius == 0.0 => {
            project_polytope_traced(&set.conservative_polytope(), z, tol, max_iter)
        }
        ProjectionMode::ExactCone => project_cones(set, z, tol, max_iter),
    }
}

fn project_cones(
    set: &RobustSafeSet,
    z: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Projected, GeometryError> {
    check_dim(set.dim(), z)?;
    let n = set.a_hat.nrows();
    let violation = |x: &DVector<f64>| (-set.slack(x).min()).max(0.0);
    if violation(z) == 0.0 {
        return Ok(Projected::identity(z));
    }
    let rows: Vec<DVector<f64>> = (0..n).map(|k| set.a_hat.row(k).transpose()).collect();
    let single = |k: usize, y: &DVector<f64>| {
        project_cone_constraint(&rows[k], set.b[k], set.radius, y, tol * 1e-2)
    };
    if n == 1 {
        let point = single(0, z)?;
        let residual = violation(&point);
        return Ok(Projected { point, iterations: 1, residual });
    }
    let mut x = z.clone();
    let mut incr = vec![DVector::zeros(z.len()); n];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let x_prev = x.clone();
        let mut incr_change = 0.0_f64;
        for k in 0..n {
            let y = &x + &incr[k];
            let next = single(k, &y)?;
            let new_incr = &y - &next;
            incr_change = incr_change.max((&new_incr - &incr[k]).norm());
            incr[k] = new_incr;
            x = next;
        }
        let change = (&x - &x_prev).norm();
        if change <= tol * 1e-2 && incr_change <= tol && violation(&x) <= tol {
            let residual = violation(&x);
            return Ok(Projected { point: x, iterations, residual });
        }
    }
    let residual = violation(&x);
    if residual <= tol {
        return Ok(Projected { point: x, iterations, residual });
    }
    Err(GeometryError::MaxIterationsExceeded { iterations, residual })
}

/// KKT certificate residual of `x` as the projection of `z` onto `poly`:
/// primal violation plus the smallest `‖(z − x) − Σ μ_k a_k‖` over
/// non-negative multipliers supported on the rows active at `x`.
pub fn kkt_residual(poly: &Polytope, z: &DVector<f64>, x: &DVector<f64>, active_tol: f64) -> f64 {
    let slack = poly.slack(x);
    let primal = (-slack.min()).max(0.0);
    let active: Vec<usize> = (0..poly.constraints()).filter(|&k| slack[k] <= active_tol).collect();
    let target = z - x;
    let mut best = target.norm();
    // subsets of at most d active rows; enough for a certificate by Carathéodory
    let d = poly.dim();
    let count = active.len().min(16);
    for mask in 1u32..(1u32 << count) {
        if mask.count_ones() as usize > d {
            continue;
        }
        let rows: Vec<usize> = (0..count).filter(|b| mask & (1 << b) != 0).map(|b| active[b]).collect();
        let a = DMatrix::from_fn(d, rows.len(), |i, j| poly.a[(rows[j], i)]);
        let gram = a.transpose() * &a;
        let rhs = a.transpose() * &target;
        let Some(mu) = linalg::solve_spd(&gram, &DMatrix::from_column_slice(rows.len(), 1, rhs.as_slice())) else {
            continue;
        };
        if mu.iter().any(|&v| v < 0.0) {
            continue;
        }
        best = best.min((&target - &a * mu.column(0)).norm());
    }
    primal + best
}

/// `{x : a_kᵀx + τ ≤ b_k ∀k}`. Non-emptiness is certified by `probe` when it
/// is strictly inside the shrunk set, otherwise by a cyclic-projection
/// feasibility pass started at the origin.
pub fn shrink_polytope(
    poly: &Polytope,
    tau_in: f64,
    probe: Option<&DVector<f64>>,
) -> Result<Polytope, GeometryError> {
    let shrunk = poly.with_offsets_lowered(tau_in);
    if let Some(p) = probe {
        check_dim(poly.dim(), p)?;
        if shrunk.min_slack(p) > 0.0 {
            return Ok(shrunk);
        }
    }
    if feasibility_pass(&shrunk) {
        Ok(shrunk)
    } else {
        Err(GeometryError::EmptyShrunkSet { tau: tau_in })
    }
}

/// Cyclic (POCS) projections from the origin. On an inconsistent system the
/// iterates settle into a limit cycle with a persistent violation.
pub fn feasibility_pass(poly: &Polytope) -> bool {
    let rows: Vec<DVector<f64>> = (0..poly.constraints()).map(|k| poly.row(k)).collect();
    let mut x = DVector::zeros(poly.dim());
    for _ in 0..DEFAULT_MAX_ITER {
        if poly.min_slack(&x) >= -1e-12 {
            return true;
        }
        let prev = x.clone();
        for (k, r) in rows.iter().enumerate() {
            if r.norm_squared() == 0.0 {
                if poly.b[k] < 0.0 {
                    return false;
                }
                continue;
            }
            x = project_halfspace(r, poly.b[k], &x).expect("nonzero normal");
        }
        if (&x - &prev).norm() < 1e-15 {
            break;
        }
    }
    poly.min_slack(&x) >= -1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn unit_box() -> Polytope {
        Polytope::bounding_box(&[-1.0, -1.0], &[1.0, 1.0])
    }

    #[test]
    fn membership() {
        let b = unit_box();
        assert!(b.contains(&v(&[0.0, 0.0]), 0.0).unwrap());
        assert!(!b.contains(&v(&[1.000001, 0.0]), 1e-9).unwrap());
        assert!(b.contains(&v(&[0.0]), 0.0).is_err());
        let set = RobustSafeSet {
            a_hat: b.a().clone(),
            b: b.b().clone(),
            radius: 0.0,
            mode: ProjectionMode::ExactCone,
            norm_bound: 2f64.sqrt(),
        };
        for x in [v(&[0.3, 0.9]), v(&[1.2, 0.0]), v(&[-1.0, 1.0])] {
            assert_eq!(set.contains(&x, 1e-12).unwrap(), b.contains(&x, 1e-12).unwrap());
        }
    }

    #[test]
    fn halfspace_examples() {
        assert_eq!(project_halfspace(&v(&[1.0, 0.0]), 0.0, &v(&[2.0, 3.0])).unwrap(), v(&[0.0, 3.0]));
        assert_eq!(project_halfspace(&v(&[0.0, 1.0]), 1.0, &v(&[5.0, 4.0])).unwrap(), v(&[5.0, 1.0]));
        assert_eq!(project_halfspace(&v(&[0.0, 1.0]), 1.0, &v(&[5.0, -4.0])).unwrap(), v(&[5.0, -4.0]));
        assert_eq!(project_halfspace(&v(&[0.0, 0.0]), 1.0, &v(&[1.0, 1.0])), Err(GeometryError::ZeroNormal));
    }

    #[test]
    fn box_projection_is_clamp() {
        let x = project_polytope(&unit_box(), &v(&[2.0, 2.0]), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((x - v(&[1.0, 1.0])).norm() < 1e-12);
        let inside = v(&[0.2, -0.7]);
        assert_eq!(project_polytope(&unit_box(), &inside, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap(), inside);
    }

    #[test]
    fn simplex_projection_matches_active_set_oracle() {
        let a = DMatrix::from_row_slice(4, 3, &[-1., 0., 0., 0., -1., 0., 0., 0., -1., 1., 1., 1.]);
        let poly = Polytope::new(a, v(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        let x = project_polytope(&poly, &v(&[1.0, 1.0, 1.0]), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        // active-set enumeration: only the sum row is active
        assert!((x - v(&[1.0 / 3.0; 3])).norm() < 1e-9);
    }

    #[test]
    fn cone_projection_examples() {
        let a = v(&[1.0, 0.0]);
        let z = v(&[3.0, 0.0]);
        // radius 0 falls back to the halfspace
        assert_eq!(project_cone_constraint(&a, 1.0, 0.0, &z, 1e-9).unwrap(), v(&[1.0, 0.0]));
        let inside = v(&[0.1, 0.2]);
        assert_eq!(project_cone_constraint(&a, 1.0, 0.5, &inside, 1e-9).unwrap(), inside);
        // grid oracle (2001² on [-4,4]², refined by bisection): (2/3, 0)
        let x = project_cone_constraint(&a, 1.0, 0.5, &z, 1e-12).unwrap();
        assert!((&x - v(&[2.0 / 3.0, 0.0])).norm() < 1e-9, "{x}");
        assert!(a.dot(&x) + 0.5 * x.norm() <= 1.0);
        assert_eq!(
            project_cone_constraint(&a, -1.0, 2.0, &z, 1e-9),
            Err(GeometryError::InfeasibleConstraintSet)
        );
    }

    #[test]
    fn robust_single_row_agrees_with_cone() {
        let set = RobustSafeSet {
            a_hat: DMatrix::from_row_slice(1, 2, &[0.6, 0.8]),
            b: v(&[0.5]),
            radius: 0.2,
            mode: ProjectionMode::ExactCone,
            norm_bound: 3.0,
        };
        let z = v(&[2.0, 1.0]);
        let a = project_robust_set(&set, &z, 1e-10, DEFAULT_MAX_ITER).unwrap();
        let b = project_cone_constraint(&v(&[0.6, 0.8]), 0.5, 0.2, &z, 1e-12).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn shrink_examples() {
        let s = shrink_polytope(&unit_box(), 0.5, None).unwrap();
        assert_eq!(s.b().as_slice(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(
            shrink_polytope(&unit_box(), 1.01, None),
            Err(GeometryError::EmptyShrunkSet { tau: 1.01 })
        );
        // probe certifies directly
        assert!(shrink_polytope(&unit_box(), 0.99, Some(&v(&[0.0, 0.0]))).is_ok());
        assert!(shrink_polytope(&unit_box(), 0.99, None).is_ok());
    }

    #[test]
    fn vertices_and_norm_bound() {
        let b = unit_box();
        assert_eq!(b.vertices().len(), 4);
        assert!((b.norm_bound() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.max_row_norm(), 1.0);
    }

    #[test]
    fn stalled_dykstra_falls_back_to_exact_active_set() {
        // two nearly parallel faces meeting at a sharp corner
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1e-3, 1.0, -1e-3]);
        let poly = Polytope::new(a, v(&[0.0, 0.0])).unwrap();
        let z = v(&[5.0, 0.001]);
        let p = project_polytope(&poly, &z, 1e-12, 3).unwrap();
        assert!(p.norm() < 1e-9, "{p}");
        assert!(kkt_residual(&poly, &z, &p, 1e-9) < 1e-9);
    }
}
