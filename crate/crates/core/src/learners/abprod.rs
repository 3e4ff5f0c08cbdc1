use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, Norm, Vector};

use super::{LearnerState, OnlineLearner};

/// Optional overrides; unset fields take the defaults documented on
/// [`AbProd::new`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AbProdParams {
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub scale: Option<f64>,
}

/// (A,B)-prod: plays `α_t w^A_t + (1 − α_t) w^B_t` with
/// `α_t = s_t / (s_t + 1 − β)` and updates `s ← s(1 + ηδ_t)` where
/// `δ_t = (⟨f_t, w^B_t⟩ − ⟨f_t, w^A_t⟩)/C`.
///
/// Since `B` keeps the fixed weight `1 − β` and the hybrid's loss is linear,
/// its cumulative loss never exceeds `B`'s by more than `C·ln(1/(1−β))/η`.
pub struct AbProd {
    a: Box<dyn OnlineLearner>,
    b: Box<dyn OnlineLearner>,
    state: LearnerState,
    weight_a: f64,
    beta: f64,
    eta: f64,
    scale: f64,
    pending: Option<(Vector, Vector)>,
}

impl AbProd {
    /// Defaults: `β = 1/2`, initial weight of `A` equal to `β`,
    /// `η = min(1/2, √(ln n / n))`, `C = m_bound · diam₂(W)`.
    pub fn new(
        a: Box<dyn OnlineLearner>,
        b: Box<dyn OnlineLearner>,
        set: Arc<ConstraintSet>,
        horizon: usize,
        m_bound: f64,
        params: AbProdParams,
    ) -> Result<Self> {
        if a.state().set().dim() != set.dim() || b.state().set().dim() != set.dim() {
            return Err(Error::Precondition("sub-learners must share the constraint set".into()));
        }
        let beta = params.beta.unwrap_or(0.5);
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Precondition(format!("beta must lie in (0, 1), got {beta}")));
        }
        let eta = params.eta.unwrap_or_else(|| default_eta(horizon));
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(Error::Precondition(format!("eta must lie in (0, 1/2], got {eta}")));
        }
        let scale = params.scale.unwrap_or_else(|| m_bound * set.diameter(Norm::L2));
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Precondition(format!("scale C must be positive, got {scale}")));
        }
        Ok(Self {
            a,
            b,
            state: LearnerState::new(set, Some(horizon)).with_loss_bound(m_bound),
            weight_a: beta,
            beta,
            eta,
            scale,
            pending: None,
        })
    }

    /// Current mixing coefficient `α_t`.
    pub fn mixing(&self) -> f64 {
        self.weight_a / (self.weight_a + 1.0 - self.beta)
    }

    pub fn weight_a(&self) -> f64 {
        self.weight_a
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Worst-case excess of the hybrid's cumulative loss over `B`'s.
    pub fn regret_to_b_allowance(&self) -> f64 {
        self.scale * (1.0 / (1.0 - self.beta)).ln() / self.eta
    }
}

pub(crate) fn default_eta(horizon: usize) -> f64 {
    let n = horizon.max(2) as f64;
    (n.ln() / n).sqrt().min(0.5)
}

impl OnlineLearner for AbProd {
    fn name(&self) -> String {
        format!("abprod({},{})", self.a.name(), self.b.name())
    }

    fn predict(&mut self) -> Result<Vector> {
        let wa = self.a.predict()?;
        let wb = self.b.predict()?;
        let alpha = self.mixing();
        let w = &wa * alpha + &wb * (1.0 - alpha);
        self.pending = Some((wa, wb));
        Ok(self.state.record(w))
    }

    fn observe(&mut self, f: &Vector) -> Result<()> {
        if self.pending.is_none() {
            self.predict()?;
        }
        let (wa, wb) = self.pending.take().expect("prediction recorded above");
        let delta = (f.dot(&wb) - f.dot(&wa)) / self.scale;
        if delta.abs() > 1.0 + 1e-12 {
            return Err(Error::ScaleTooSmall { delta, scale: self.scale });
        }
        self.weight_a *= 1.0 + self.eta * delta;
        self.state.observe(f)?;
        self.a.observe(f)?;
        self.b.observe(f)
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }
}
