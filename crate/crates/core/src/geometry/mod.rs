//! Convex bodies and the support-function machinery that follow-the-leader
//! runs on.
//!
//! Three families are supported: Euclidean balls centred at the origin,
//! ellipsoids `{w : wᵀQw ≤ 1}` and polytopes given by their vertices. For
//! each the support function `Φ(θ) = max_{w∈W} ⟨w, θ⟩` is available in closed
//! form (or by vertex scan), together with the exposed face `∂Φ(θ)`, the
//! Euclidean projection (balls and ellipsoids), diameters in the usual
//! p-norms and the smallest principal curvature of the boundary.

mod polytope;
pub mod sampling;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use polytope::hull_distance;

pub type Vector = DVector<f64>;

/// Membership tolerance shared by every "is this point in the set" check.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const DEDUP_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const TIE_REL_TOL: f64 = 1e-10;
const PROJECTION_RESIDUAL: f64 = 1e-12;
const PROJECTION_MAX_ITERS: usize = 200;

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: v.len() });
    }
    Ok(())
}

pub(crate) fn check_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `i`-th standard basis vector of `ℝ^dim`.
pub fn unit(dim: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[i] = 1.0;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn of(self, v: &Vector) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.norm(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    radius: f64,
    dim: usize,
}

impl Ball {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{w : wᵀQw ≤ 1}` with `Q` symmetric positive definite. The eigen
/// decomposition is cached since projection and curvature both work in the
/// eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    q: DMatrix<f64>,
    q_inv: DMatrix<f64>,
    /// ascending
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let d = q.nrows();
        if d == 0 || q.ncols() != d {
            return Err(Error::InvalidSet(format!(
                "Q must be a non-empty square matrix, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("ellipsoid matrix"));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidSet(format!("Q is not symmetric (max asymmetry {asym:e})")));
        }
        let eig = SymmetricEigen::new(q.clone());
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(d, d);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors.set_column(col, &eig.eigenvectors.column(i));
        }
        if eigenvalues[0] <= 0.0 {
            return Err(Error::InvalidSet(format!(
                "Q is not positive definite (smallest eigenvalue {:e})",
                eigenvalues[0]
            )));
        }
        let inv_diag = DMatrix::from_diagonal(&eigenvalues.map(|l| 1.0 / l));
        let mut q_inv = &eigenvectors * inv_diag * eigenvectors.transpose();
        // symmetrise away rounding so that θᵀQ⁻¹θ is exactly a quadratic form
        q_inv = (&q_inv + q_inv.transpose()) * 0.5;
        Ok(Self { q, q_inv, eigenvalues, eigenvectors })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSet("Q rows must all have length equal to the row count".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn q_inv(&self) -> &DMatrix<f64> {
        &self.q_inv
    }

    /// Orthonormal eigenvectors of `Q` as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    /// `√(wᵀQw)`; the set is the unit sublevel set of this gauge.
    pub fn gauge(&self, w: &Vector) -> f64 {
        w.dot(&(&self.q * w)).max(0.0).sqrt()
    }

    /// Maps the unit ball onto the ellipsoid: `u ↦ Q^{-1/2} u`.
    pub fn from_unit_ball(&self, u: &Vector) -> Vector {
        let y = self.eigenvectors.transpose() * u;
        let scaled = DVector::from_iterator(y.len(), y.iter().zip(self.eigenvalues.iter()).map(|(yi, l)| yi / l.sqrt()));
        &self.eigenvectors * scaled
    }

    fn project(&self, x: &Vector) -> Result<Vector> {
        if self.gauge(x) <= 1.0 {
            return Ok(x.clone());
        }
        // Stationarity of ½‖w−x‖² + ½μ(wᵀQw − 1) gives w(μ) = (I + μQ)⁻¹x.
        // In the eigenbasis the constraint residual is
        //   g(μ) = Σ λᵢ yᵢ² / (1 + μλᵢ)² − 1,
        // convex and strictly decreasing on μ ≥ 0, with g(0) > 0.
        let y = self.eigenvectors.transpose() * x;
        let lam = &self.eigenvalues;
        let residual = |mu: f64| -> (f64, f64) {
            let mut g = -1.0;
            let mut dg = 0.0;
            for (yi, li) in y.iter().zip(lam.iter()) {
                let den = 1.0 + mu * li;
                g += li * yi * yi / (den * den);
                dg -= 2.0 * li * li * yi * yi / (den * den * den);
            }
            (g, dg)
        };
        let mut lo = 0.0;
        let mut hi = y.norm() / lam[0].sqrt();
        let mut mu = 0.0;
        let mut converged = false;
        for _ in 0..PROJECTION_MAX_ITERS {
            let (g, dg) = residual(mu);
            if g.abs() <= PROJECTION_RESIDUAL {
                converged = true;
                break;
            }
            if g > 0.0 {
                lo = mu;
            } else {
                hi = mu;
            }
            let newton = mu - g / dg;
            mu = if dg < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ProjectionDiverged(PROJECTION_MAX_ITERS));
        }
        let wy = DVector::from_iterator(y.len(), y.iter().zip(lam.iter()).map(|(yi, li)| yi / (1.0 + mu * li)));
        let w = &self.eigenvectors * wy;
        let g = self.gauge(&w);
        Ok(if g > 1.0 { w / g } else { w })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
}

impl Polytope {
    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }
}

/// A non-empty compact convex subset of `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    /// `Φ(θ)`
    pub value: f64,
    /// a point of `argmax_{w∈W} ⟨w, θ⟩`
    pub maximizer: Vector,
    /// whether the argmax is a singleton (`Φ` differentiable at `θ`)
    pub unique: bool,
}

/// The exposed face `∂Φ(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Subdifferential {
    /// The face is the convex hull of these points.
    Points(Vec<Vector>),
    /// `θ = 0`: every point of the set is a maximiser.
    WholeSet,
}

impl ConstraintSet {
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        if dim == 0 {
            return Err(Error::InvalidSet("dimension must be at least 1".into()));
        }
        Ok(Self::Ball(Ball { radius, dim }))
    }

    pub fn ellipsoid(q: DMatrix<f64>) -> Result<Self> {
        Ellipsoid::new(q).map(Self::Ellipsoid)
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidSet("polytope needs at least one vertex".into()));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidSet("dimension must be at least 1".into()));
        }
        let mut kept: Vec<Vector> = Vec::with_capacity(vertices.len());
        for v in vertices {
            check_dim(d, &v)?;
            check_finite(&v, "polytope vertex")?;
            if !kept.iter().any(|k| (k - &v).amax() <= DEDUP_TOL) {
                kept.push(v);
            }
        }
        Ok(Self::Polytope(Polytope { vertices: kept }))
    }

    /// Probability simplex `conv{e₁, …, e_d}`.
    pub fn simplex(dim: usize) -> Result<Self> {
        Self::polytope((0..dim).map(|i| unit(dim, i)).collect())
    }

    /// The slightly elongated 4-dimensional ellipsoid used in the reference
    /// simulations, digits as published.
    pub fn reference_ellipsoid() -> Self {
        let rows: Vec<Vec<f64>> =
            serde_json::from_str(REFERENCE_Q_JSON).expect("bundled Q fixture is valid JSON");
        Self::Ellipsoid(Ellipsoid::from_rows(&rows).expect("bundled Q fixture is positive definite"))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball(b) => b.dim,
            Self::Ellipsoid(e) => e.dim(),
            Self::Polytope(p) => p.vertices[0].len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Ball(_) => "ball",
            Self::Ellipsoid(_) => "ellipsoid",
            Self::Polytope(_) => "polytope",
        }
    }

    fn check_input(&self, v: &Vector, what: &'static str) -> Result<()> {
        check_dim(self.dim(), v)?;
        check_finite(v, what)
    }

    /// Deterministic maximiser used when `θ = 0`: the point maximising
    /// `⟨w, e₁⟩` for smooth bodies, vertex 0 for polytopes.
    pub fn canonical_point(&self) -> Vector {
        match self {
            Self::Ball(b) => unit(b.dim, 0) * b.radius,
            Self::Ellipsoid(e) => {
                let col = e.q_inv.column(0).into_owned();
                let s = e.q_inv[(0, 0)].sqrt();
                col / s
            }
            Self::Polytope(p) => p.vertices[0].clone(),
        }
    }

    pub fn support(&self, theta: &Vector) -> Result<SupportResult> {
        self.check_input(theta, "theta")?;
        let norm = theta.norm();
        if norm == 0.0 {
            let unique = matches!(self, Self::Polytope(p) if p.vertices.len() == 1);
            return Ok(SupportResult { value: 0.0, maximizer: self.canonical_point(), unique });
        }
        Ok(match self {
            Self::Ball(b) => SupportResult {
                value: b.radius * norm,
                maximizer: theta * (b.radius / norm),
                unique: true,
            },
            Self::Ellipsoid(e) => {
                let u = &e.q_inv * theta;
                let s = theta.dot(&u).max(0.0).sqrt();
                SupportResult { value: s, maximizer: u / s, unique: true }
            }
            Self::Polytope(p) => {
                let (best, value) = p
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, v.dot(theta)))
                    .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
                let tol = TIE_REL_TOL * norm.max(1.0);
                let ties = p.vertices.iter().filter(|v| v.dot(theta) >= value - tol).count();
                // lowest index among near-ties
                let first = p.vertices.iter().position(|v| v.dot(theta) >= value - tol).unwrap_or(best);
                SupportResult {
                    value: p.vertices[first].dot(theta),
                    maximizer: p.vertices[first].clone(),
                    unique: ties == 1,
                }
            }
        })
    }

    pub fn subdifferential_extent(&self, theta: &Vector) -> Result<Subdifferential> {
        self.check_input(theta, "theta")?;
        let norm = theta.norm();
        if norm == 0.0 {
            return Ok(match self {
                Self::Polytope(p) if p.vertices.len() == 1 => Subdifferential::Points(p.vertices.clone()),
                _ => Subdifferential::WholeSet,
            });
        }
        Ok(match self {
            Self::Polytope(p) => {
                let value = p.vertices.iter().map(|v| v.dot(theta)).fold(f64::NEG_INFINITY, f64::max);
                let tol = TIE_REL_TOL * norm.max(1.0);
                Subdifferential::Points(p.vertices.iter().filter(|v| v.dot(theta) >= value - tol).cloned().collect())
            }
            _ => Subdifferential::Points(vec![self.support(theta)?.maximizer]),
        })
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check_input(x, "projection input")?;
        match self {
            Self::Ball(b) => {
                let n = x.norm();
                Ok(if n <= b.radius { x.clone() } else { x * (b.radius / n) })
            }
            Self::Ellipsoid(e) => e.project(x),
            Self::Polytope(_) => Err(Error::UnsupportedProjection("polytope")),
        }
    }

    /// Smallest principal curvature of the boundary; `None` for polytopes.
    pub fn min_principal_curvature(&self) -> Option<f64> {
        match self {
            Self::Ball(b) => Some(1.0 / b.radius),
            Self::Ellipsoid(e) => {
                let l = &e.eigenvalues;
                Some(l[0] / l[l.len() - 1].sqrt())
            }
            Self::Polytope(_) => None,
        }
    }

    /// `sup_{w₁,w₂∈W} ‖w₁ − w₂‖` in the requested norm.
    pub fn diameter(&self, norm: Norm) -> f64 {
        match self {
            Self::Ball(b) => match norm {
                Norm::L2 | Norm::Linf => 2.0 * b.radius,
                Norm::L1 => 2.0 * b.radius * (b.dim as f64).sqrt(),
            },
            // Centrally symmetric, so the diameter is twice the largest norm of
            // a point, which is a support value: over the dual-norm unit ball's
            // extreme points (signed basis vectors for linf, sign vectors for l1).
            Self::Ellipsoid(e) => match norm {
                Norm::L2 => 2.0 / e.eigenvalues[0].sqrt(),
                Norm::Linf => 2.0 * (0..e.dim()).map(|i| e.q_inv[(i, i)].sqrt()).fold(0.0, f64::max),
                Norm::L1 => {
                    let d = e.dim();
                    let mut best: f64 = 0.0;
                    // s and −s give the same value; fix the first sign
                    for mask in 0u64..(1u64 << (d - 1)) {
                        let s = DVector::from_fn(d, |i, _| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 });
                        best = best.max(s.dot(&(&e.q_inv * &s)));
                    }
                    2.0 * best.sqrt()
                }
            },
            Self::Polytope(p) => {
                let mut best: f64 = 0.0;
                for (i, a) in p.vertices.iter().enumerate() {
                    for b in &p.vertices[i + 1..] {
                        best = best.max(norm.of(&(a - b)));
                    }
                }
                best
            }
        }
    }

    /// How far `x` lies outside the set (0 inside). Balls and polytopes
    /// report Euclidean distance; ellipsoids report `max(0, √(xᵀQx) − 1)`.
    pub fn membership_violation(&self, x: &Vector) -> f64 {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        match self {
            Self::Ball(b) => (x.norm() - b.radius).max(0.0),
            Self::Ellipsoid(e) => (e.gauge(x) - 1.0).max(0.0),
            Self::Polytope(p) => hull_distance(&p.vertices, x),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.membership_violation(x) <= MEMBERSHIP_TOL
    }
}

/// Minimum principal curvature at a boundary point of `{w : wᵀQw ≤ 1}`:
/// the smallest eigenvalue of `vᵀ(2Q)v / ‖2Qw‖` over unit tangent vectors
/// `v ⟂ Qw`.
pub fn weingarten_min_eig(q: &DMatrix<f64>, w: &Vector) -> Result<f64> {
    Ok(weingarten_min_direction(q, w)?.0)
}

/// As [`weingarten_min_eig`], also returning the unit tangent direction of
/// least normal curvature.
pub fn weingarten_min_direction(q: &DMatrix<f64>, w: &Vector) -> Result<(f64, Vector)> {
    let d = q.nrows();
    check_dim(d, w)?;
    check_finite(w, "boundary point")?;
    if d < 2 {
        return Err(Error::Precondition("curvature needs dimension at least 2".into()));
    }
    let off = (w.dot(&(q * w)) - 1.0).abs();
    if off > MEMBERSHIP_TOL {
        return Err(Error::NotOnBoundary(off));
    }
    let grad = q * w * 2.0;
    let gnorm = grad.norm();
    let basis = tangent_basis(&(&grad / gnorm));
    let hess = q * 2.0;
    let projected = basis.transpose() * hess * &basis;
    let projected = (&projected + projected.transpose()) * 0.5;
    let eig = SymmetricEigen::new(projected);
    let k = eig.eigenvalues.imin();
    let dir = &basis * eig.eigenvectors.column(k);
    Ok((eig.eigenvalues[k] / gnorm, dir))
}

/// Orthonormal basis (as columns) of the hyperplane orthogonal to the unit
/// vector `n`, built from a Householder reflection taking `n` to `±e₁`.
fn tangent_basis(n: &Vector) -> DMatrix<f64> {
    let d = n.len();
    let sign = if n[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = n.clone();
    v[0] += sign;
    let vv = v.dot(&v);
    let h = DMatrix::identity(d, d) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, d - 1).into_owned()
}

/// Checks one instance of λ-strong convexity: whether
/// `γx + (1−γ)y + γ(1−γ)(λ/2)‖x−y‖²·z` lies in the set.
pub fn strong_convexity_witness(
    set: &ConstraintSet,
    lambda: f64,
    x: &Vector,
    y: &Vector,
    gamma: f64,
    z: &Vector,
) -> Result<bool> {
    for (v, what) in [(x, "x"), (y, "y"), (z, "z")] {
        check_dim(set.dim(), v)?;
        check_finite(v, what)?;
    }
    if !set.contains(x) || !set.contains(y) {
        return Err(Error::Precondition("x and y must lie in the set".into()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Precondition(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if (z.norm() - 1.0).abs() > MEMBERSHIP_TOL {
        return Err(Error::Precondition("z must be a unit vector".into()));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Precondition(format!("lambda must be non-negative, got {lambda}")));
    }
    let radius = gamma * (1.0 - gamma) * 0.5 * lambda * (x - y).norm_squared();
    let point = x * gamma + y * (1.0 - gamma) + z * radius;
    Ok(set.contains(&point))
}

pub const REFERENCE_Q_JSON: &str = include_str!("../../fixtures/reference_q.json");

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn ball_support_closed_form() {
        let ball = ConstraintSet::ball(1.0, 2).unwrap();
        let s = ball.support(&v(&[3.0, 4.0])).unwrap();
        assert_relative_eq!(s.value, 5.0, epsilon = 1e-15);
        assert_relative_eq!(s.maximizer, v(&[0.6, 0.8]), epsilon = 1e-15);
        assert!(s.unique);
    }

    #[test]
    fn simplex_vertex_scan() {
        let simplex = ConstraintSet::simplex(3).unwrap();
        let s = simplex.support(&v(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.maximizer, v(&[1.0, 0.0, 0.0]));
        assert!(s.unique);
    }

    #[test]
    fn polytope_ties_pick_lowest_index() {
        let square = ConstraintSet::polytope(vec![
            v(&[-1.0, -1.0]),
            v(&[1.0, 1.0]),
            v(&[1.0, -1.0]),
            v(&[-1.0, 1.0]),
        ])
        .unwrap();
        let s = square.support(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(s.maximizer, v(&[1.0, 1.0]));
        assert!(!s.unique);
        let Subdifferential::Points(face) = square.subdifferential_extent(&v(&[1.0, 0.0])).unwrap() else {
            panic!("expected a finite face");
        };
        assert_eq!(face, vec![v(&[1.0, 1.0]), v(&[1.0, -1.0])]);
    }

    #[test]
    fn subdifferential_examples() {
        let ball = ConstraintSet::ball(1.0, 2).unwrap();
        assert_eq!(
            ball.subdifferential_extent(&v(&[0.0, 1.0])).unwrap(),
            Subdifferential::Points(vec![v(&[0.0, 1.0])])
        );
        assert_eq!(ball.subdifferential_extent(&v(&[0.0, 0.0])).unwrap(), Subdifferential::WholeSet);
        let simplex = ConstraintSet::simplex(3).unwrap();
        let Subdifferential::Points(face) = simplex.subdifferential_extent(&v(&[1.0, 1.0, 1.0])).unwrap() else {
            panic!()
        };
        assert_eq!(face.len(), 3);
    }

    #[test]
    fn zero_theta_is_canonical_and_not_unique() {
        let e = ConstraintSet::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 4.0]))).unwrap();
        let s = e.support(&v(&[0.0, 0.0])).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(!s.unique);
        assert_relative_eq!(s.maximizer, v(&[1.0, 0.0]), epsilon = 1e-15);
        let simplex = ConstraintSet::simplex(3).unwrap();
        assert_eq!(simplex.support(&Vector::zeros(3)).unwrap().maximizer, unit(3, 0));
    }

    #[test]
    fn support_rejects_bad_input() {
        let ball = ConstraintSet::ball(1.0, 2).unwrap();
        assert_eq!(
            ball.support(&v(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        );
        assert!(matches!(ball.support(&v(&[f64::NAN, 0.0])), Err(Error::NonFinite(_))));
    }

    #[test]
    fn constructor_validation() {
        assert!(ConstraintSet::ball(0.0, 2).is_err());
        assert!(ConstraintSet::ellipsoid(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(ConstraintSet::ellipsoid(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(ConstraintSet::polytope(vec![]).is_err());
        let p = ConstraintSet::polytope(vec![v(&[1.0, 0.0]), v(&[1.0, 1e-13]), v(&[0.0, 1.0])]).unwrap();
        let ConstraintSet::Polytope(p) = p else { unreachable!() };
        assert_eq!(p.vertices().len(), 2);
    }

    #[test]
    fn ball_projection() {
        let ball = ConstraintSet::ball(1.0, 2).unwrap();
        assert_relative_eq!(ball.project(&v(&[3.0, 4.0])).unwrap(), v(&[0.6, 0.8]), epsilon = 1e-15);
        assert_eq!(ball.project(&v(&[0.2, 0.1])).unwrap(), v(&[0.2, 0.1]));
        assert_eq!(
            ConstraintSet::simplex(2).unwrap().project(&v(&[0.0, 0.0])),
            Err(Error::UnsupportedProjection("polytope"))
        );
    }

    #[test]
    fn curvature_closed_forms() {
        assert_eq!(ConstraintSet::ball(2.0, 3).unwrap().min_principal_curvature(), Some(0.5));
        let lam: f64 = 0.5;
        let e = ConstraintSet::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 1.0 / (lam * lam)]))).unwrap();
        assert_relative_eq!(e.min_principal_curvature().unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(ConstraintSet::simplex(3).unwrap().min_principal_curvature(), None);
    }

    #[test]
    fn weingarten_on_sphere_and_axis_points() {
        let id = DMatrix::identity(3, 3);
        let w = v(&[0.0, 0.6, 0.8]);
        assert_relative_eq!(weingarten_min_eig(&id, &w).unwrap(), 1.0, epsilon = 1e-12);
        let q = DMatrix::from_diagonal(&v(&[1.0, 4.0]));
        // curvature of the boundary curve s ↦ (cos s, ½ sin s) by central differences
        let fd_curvature = |s: f64| {
            let h = 1e-4;
            let p = |s: f64| (s.cos(), 0.5 * s.sin());
            let (a, b, c) = (p(s - h), p(s), p(s + h));
            let (dx, dy) = ((c.0 - a.0) / (2.0 * h), (c.1 - a.1) / (2.0 * h));
            let (ddx, ddy) = ((c.0 - 2.0 * b.0 + a.0) / (h * h), (c.1 - 2.0 * b.1 + a.1) / (h * h));
            (dx * ddy - dy * ddx).abs() / (dx * dx + dy * dy).powf(1.5)
        };
        let at_major = weingarten_min_eig(&q, &v(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(at_major, 4.0, epsilon = 1e-12);
        assert_relative_eq!(at_major, fd_curvature(0.0), epsilon = 1e-5);
        let at_minor = weingarten_min_eig(&q, &v(&[0.0, 0.5])).unwrap();
        assert_relative_eq!(at_minor, fd_curvature(std::f64::consts::FRAC_PI_2), epsilon = 1e-5);
        assert!(matches!(weingarten_min_eig(&q, &v(&[0.5, 0.0])), Err(Error::NotOnBoundary(_))));
    }

    #[test]
    fn strong_convexity_witness_on_ball() {
        let ball = ConstraintSet::ball(1.0, 2).unwrap();
        let (x, y, z) = (v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]));
        assert!(strong_convexity_witness(&ball, 1.0, &x, &y, 0.5, &z).unwrap());
        assert!(!strong_convexity_witness(&ball, 4.0, &x, &y, 0.5, &z).unwrap());
        assert!(strong_convexity_witness(&ball, 1.0, &v(&[2.0, 0.0]), &y, 0.5, &z).is_err());
        assert!(strong_convexity_witness(&ball, 1.0, &x, &y, 1.5, &z).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(ConstraintSet::ball(1.0, 5).unwrap().diameter(Norm::L2), 2.0);
        assert_eq!(ConstraintSet::simplex(3).unwrap().diameter(Norm::L1), 2.0);
        let e = ConstraintSet::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 4.0]))).unwrap();
        assert_relative_eq!(e.diameter(Norm::L2), 2.0, epsilon = 1e-14);
        // semi-axes 1 and 1/2: max |x|+|y| on the ellipse is √(1 + 1/4)
        assert_relative_eq!(e.diameter(Norm::L1), 2.0 * 1.25f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(e.diameter(Norm::Linf), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn polytope_membership() {
        let simplex = ConstraintSet::simplex(3).unwrap();
        assert!(simplex.contains(&v(&[0.2, 0.3, 0.5])));
        assert!(!simplex.contains(&v(&[0.5, 0.5, 0.5])));
        assert_relative_eq!(simplex.membership_violation(&v(&[0.0, 0.0, 0.0])), 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn reference_ellipsoid_loads() {
        let e = ConstraintSet::reference_ellipsoid();
        assert_eq!(e.dim(), 4);
        let lam0 = e.min_principal_curvature().unwrap();
        assert!(lam0 > 0.07 && lam0 < 0.075, "{lam0}");
    }
}
