//! Online learners for linear losses `ℓ_t(w) = ⟨f_t, w⟩`.
//!
//! Every learner keeps the cumulative loss vector `F = Σ_{i<t} f_i` and
//! predicts from it:
//!
//! * [`Ftl`] plays `argmax_{w∈W} ⟨w, −F⟩`, i.e. the leader.
//! * [`Ftrl`] plays the Euclidean projection of `−F/√(t−1)` (quadratic
//!   regularizer with `η_t = 1/√(t−1)`).
//! * [`Ftsl`] plays the leader on a ball, shrunk towards the origin by a
//!   horizon-dependent factor.
//! * [`AbProd`] mixes two learners with a multiplicative weight on their
//!   loss difference.

mod abprod;
mod spec;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, check_finite, unit, ConstraintSet, Vector};

pub use abprod::{AbProd, AbProdParams};
pub use spec::{LearnerKind, LearnerParams, LearnerSpec};

pub trait OnlineLearner: Send {
    fn name(&self) -> String;

    /// Prediction `w_t` for the current round.
    fn predict(&mut self) -> Result<Vector>;

    /// Reveal `f_t` and advance to round `t + 1`.
    fn observe(&mut self, f: &Vector) -> Result<()>;

    fn state(&self) -> &LearnerState;

    /// True when `predict` after the last round yields the leader `w_{n+1}`
    /// needed by the regret identities.
    fn follows_leader(&self) -> bool {
        false
    }
}

/// Round counter, cumulative loss and last prediction shared by all
/// learners.
#[derive(Debug, Clone)]
pub struct LearnerState {
    t: usize,
    cumulative: Vector,
    horizon: Option<usize>,
    set: Arc<ConstraintSet>,
    w_current: Option<Vector>,
    loss_bound: Option<f64>,
}

impl LearnerState {
    pub fn new(set: Arc<ConstraintSet>, horizon: Option<usize>) -> Self {
        let d = set.dim();
        Self { t: 1, cumulative: Vector::zeros(d), horizon, set, w_current: None, loss_bound: None }
    }

    /// Losses with `‖f‖₂` above `m` are logged, not rejected.
    pub fn with_loss_bound(mut self, m: f64) -> Self {
        self.loss_bound = Some(m);
        self
    }

    /// 1-based index of the round about to be played.
    pub fn round(&self) -> usize {
        self.t
    }

    /// `F = Σ_{i<t} f_i`.
    pub fn cumulative(&self) -> &Vector {
        &self.cumulative
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    pub fn set(&self) -> &Arc<ConstraintSet> {
        &self.set
    }

    pub fn last_prediction(&self) -> Option<&Vector> {
        self.w_current.as_ref()
    }

    pub fn observe(&mut self, f: &Vector) -> Result<()> {
        check_dim(self.set.dim(), f)?;
        check_finite(f, "loss vector")?;
        if let Some(m) = self.loss_bound {
            let norm = f.norm();
            if norm > m * (1.0 + 1e-12) {
                log::warn!("round {}: loss norm {norm} exceeds the declared bound {m}", self.t);
            }
        }
        self.cumulative += f;
        self.t += 1;
        Ok(())
    }

    fn record(&mut self, w: Vector) -> Vector {
        self.w_current = Some(w.clone());
        w
    }
}

/// Follow the leader.
#[derive(Debug, Clone)]
pub struct Ftl {
    state: LearnerState,
    first: Option<Vector>,
}

impl Ftl {
    pub fn new(set: Arc<ConstraintSet>) -> Self {
        Self { state: LearnerState::new(set, None), first: None }
    }

    /// Override the first-round prediction (default: the boundary point
    /// maximising `⟨w, e₁⟩`).
    pub fn with_first(mut self, w1: Vector) -> Result<Self> {
        check_dim(self.state.set.dim(), &w1)?;
        if !self.state.set.contains(&w1) {
            return Err(Error::Precondition("w1 must lie in the constraint set".into()));
        }
        self.first = Some(w1);
        Ok(self)
    }

    pub fn with_loss_bound(mut self, m: f64) -> Self {
        self.state = self.state.with_loss_bound(m);
        self
    }
}

impl OnlineLearner for Ftl {
    fn name(&self) -> String {
        "ftl".into()
    }

    fn predict(&mut self) -> Result<Vector> {
        let set = &self.state.set;
        let w = if self.state.t == 1 {
            match &self.first {
                Some(w1) => w1.clone(),
                None => set.support(&unit(set.dim(), 0))?.maximizer,
            }
        } else {
            set.support(&-&self.state.cumulative)?.maximizer
        };
        Ok(self.state.record(w))
    }

    fn observe(&mut self, f: &Vector) -> Result<()> {
        self.state.observe(f)
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn follows_leader(&self) -> bool {
        true
    }
}

/// Follow the regularized leader with `R(w) = ½‖w‖²` and `η_t = 1/√(t−1)`:
/// `w_t = Π_W(−F/√(t−1))`, and `w₁ = Π_W(0)`.
#[derive(Debug, Clone)]
pub struct Ftrl {
    state: LearnerState,
}

impl Ftrl {
    pub fn new(set: Arc<ConstraintSet>) -> Result<Self> {
        if matches!(*set, ConstraintSet::Polytope(_)) {
            return Err(Error::UnsupportedProjection("polytope"));
        }
        Ok(Self { state: LearnerState::new(set, None) })
    }

    pub fn with_loss_bound(mut self, m: f64) -> Self {
        self.state = self.state.with_loss_bound(m);
        self
    }
}

impl OnlineLearner for Ftrl {
    fn name(&self) -> String {
        "ftrl".into()
    }

    fn predict(&mut self) -> Result<Vector> {
        let set = &self.state.set;
        let t = self.state.t;
        let target = if t == 1 {
            Vector::zeros(set.dim())
        } else {
            -&self.state.cumulative / ((t - 1) as f64).sqrt()
        };
        let w = set.project(&target)?;
        Ok(self.state.record(w))
    }

    fn observe(&mut self, f: &Vector) -> Result<()> {
        self.state.observe(f)
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }
}

/// Follow the shrunken leader on a ball of radius `r` (predictions for the
/// unit ball scaled by `r`).
#[derive(Debug, Clone)]
pub struct Ftsl {
    state: LearnerState,
    radius: f64,
}

impl Ftsl {
    pub fn new(set: Arc<ConstraintSet>, horizon: usize) -> Result<Self> {
        let ConstraintSet::Ball(ball) = &*set else {
            return Err(Error::Precondition(format!("ftsl is defined on balls only, got a {}", set.kind())));
        };
        if horizon == 0 {
            return Err(Error::Precondition("horizon must be at least 1".into()));
        }
        let radius = ball.radius();
        Ok(Self { state: LearnerState::new(set, Some(horizon)), radius })
    }

    pub fn with_loss_bound(mut self, m: f64) -> Self {
        self.state = self.state.with_loss_bound(m);
        self
    }

    /// Shrinkage factor `σ_t` applied to the unit-ball leader `−F/‖F‖`.
    pub fn shrinkage(norm_f: f64, t: usize, horizon: usize) -> f64 {
        let slack = if t < horizon { (t + 2) as f64 } else { horizon as f64 };
        norm_f / (norm_f * norm_f + slack).sqrt()
    }
}

impl OnlineLearner for Ftsl {
    fn name(&self) -> String {
        "ftsl".into()
    }

    fn predict(&mut self) -> Result<Vector> {
        let d = self.state.set.dim();
        let t = self.state.t;
        let n = self.state.horizon.ok_or(Error::MissingHorizon { learner: "ftsl" })?;
        if t > n {
            return Err(Error::PastHorizon { t, n });
        }
        let f = &self.state.cumulative;
        let norm = f.norm();
        let w = if t == 1 || norm == 0.0 {
            Vector::zeros(d)
        } else {
            let sigma = Self::shrinkage(norm, t, n);
            -f * (sigma * self.radius / norm)
        };
        Ok(self.state.record(w))
    }

    fn observe(&mut self, f: &Vector) -> Result<()> {
        self.state.observe(f)
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn unit_disc() -> Arc<ConstraintSet> {
        Arc::new(ConstraintSet::ball(1.0, 2).unwrap())
    }

    #[test]
    fn observe_accumulates() {
        let mut s = LearnerState::new(unit_disc(), None);
        s.observe(&v(&[1.0, 2.0])).unwrap();
        assert_eq!(s.cumulative(), &v(&[1.0, 2.0]));
        assert_eq!(s.round(), 2);
        for _ in 0..4 {
            s.observe(&v(&[1.0, 2.0])).unwrap();
        }
        assert_eq!(s.cumulative(), &v(&[5.0, 10.0]));
        assert!(matches!(s.observe(&v(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ftl_first_round_and_leader() {
        let mut ftl = Ftl::new(unit_disc());
        assert_eq!(ftl.predict().unwrap(), v(&[1.0, 0.0]));
        ftl.observe(&v(&[-1.0, 0.0])).unwrap();
        assert_eq!(ftl.predict().unwrap(), v(&[1.0, 0.0]));

        let mut ftl = Ftl::new(Arc::new(ConstraintSet::simplex(3).unwrap()));
        ftl.predict().unwrap();
        ftl.observe(&v(&[0.1, 0.5, 0.9])).unwrap();
        assert_eq!(ftl.predict().unwrap(), v(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn ftl_custom_first_point() {
        let ftl = Ftl::new(unit_disc()).with_first(v(&[0.0, 1.0])).unwrap();
        let mut ftl = ftl;
        assert_eq!(ftl.predict().unwrap(), v(&[0.0, 1.0]));
        assert!(Ftl::new(unit_disc()).with_first(v(&[2.0, 0.0])).is_err());
    }

    fn ftrl_at(set: Arc<ConstraintSet>, t: usize, f: Vector) -> Vector {
        let mut l = Ftrl::new(set).unwrap();
        // reach round t with cumulative loss f by one observation plus zeros
        l.observe(&f).unwrap();
        for _ in 2..t {
            l.observe(&Vector::zeros(f.len())).unwrap();
        }
        assert_eq!(l.state().round(), t);
        l.predict().unwrap()
    }

    #[test]
    fn ftrl_closed_form_branches() {
        assert_relative_eq!(ftrl_at(unit_disc(), 2, v(&[-3.0, 0.0])), v(&[1.0, 0.0]), epsilon = 1e-15);
        assert_relative_eq!(ftrl_at(unit_disc(), 5, v(&[-1.0, 0.0])), v(&[0.5, 0.0]), epsilon = 1e-15);
        let mut fresh = Ftrl::new(unit_disc()).unwrap();
        assert_eq!(fresh.predict().unwrap(), v(&[0.0, 0.0]));
        assert!(Ftrl::new(Arc::new(ConstraintSet::simplex(2).unwrap())).is_err());
    }

    #[test]
    fn ftrl_on_ellipsoid_matches_projection() {
        let set = Arc::new(ConstraintSet::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 4.0]))).unwrap());
        let w = ftrl_at(set.clone(), 10, v(&[-2.0, -2.0]));
        let direct = set.project(&(v(&[2.0, 2.0]) / 3.0)).unwrap();
        assert_relative_eq!(w, direct, epsilon = 1e-15);
    }

    fn ftsl_at(t: usize, n: usize, f: Vector) -> Vector {
        let mut l = Ftsl::new(Arc::new(ConstraintSet::ball(1.0, f.len()).unwrap()), n).unwrap();
        l.observe(&f).unwrap();
        for _ in 2..t {
            l.observe(&Vector::zeros(f.len())).unwrap();
        }
        l.predict().unwrap()
    }

    #[test]
    fn ftsl_shrinkage_steps() {
        let w = ftsl_at(2, 100, v(&[-1.0, 0.0]));
        assert_relative_eq!(w, v(&[1.0 / 5f64.sqrt(), 0.0]), epsilon = 1e-15);
        let w = ftsl_at(100, 100, v(&[-10.0, 0.0]));
        assert_relative_eq!(w, v(&[10.0 / 200f64.sqrt(), 0.0]), epsilon = 1e-15);
        let w = ftsl_at(7, 100, v(&[0.0, 0.0]));
        assert_eq!(w, v(&[0.0, 0.0]));
    }

    #[test]
    fn ftsl_preconditions() {
        assert!(Ftsl::new(Arc::new(ConstraintSet::simplex(2).unwrap()), 10).is_err());
        let mut l = Ftsl::new(unit_disc(), 1).unwrap();
        l.predict().unwrap();
        l.observe(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(l.predict(), Err(Error::PastHorizon { t: 2, n: 1 }));
    }

    #[test]
    fn ftsl_scales_with_radius() {
        let mut l = Ftsl::new(Arc::new(ConstraintSet::ball(3.0, 2).unwrap()), 100).unwrap();
        l.predict().unwrap();
        l.observe(&v(&[-1.0, 0.0])).unwrap();
        assert_relative_eq!(l.predict().unwrap(), v(&[3.0 / 5f64.sqrt(), 0.0]), epsilon = 1e-15);
    }
}
