//! Posterior machinery behind the Beta-Bernoulli lower-bound construction.
//!
//! The set is the ellipse `x² + y²/h² ≤ 1`, losses are `(2X − 1, −L)` with
//! `X ~ Bernoulli(P)` and `P ~ Beta(K, K)`. Conditional on the past the
//! Bayes-optimal play is `w^{P̂}` with `P̂` the posterior mean.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, Vector};

/// Beta(K,K) prior updated with `t` Bernoulli draws summing to `x_sum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorState {
    pub k: f64,
    pub t: u64,
    pub x_sum: u64,
}

impl PosteriorState {
    pub fn new(k: f64) -> Self {
        Self { k, t: 0, x_sum: 0 }
    }

    pub fn observe(&mut self, x: bool) {
        self.t += 1;
        self.x_sum += u64::from(x);
    }

    pub fn mean(&self) -> f64 {
        posterior_mean(self)
    }
}

/// `(K + Σ X_i) / (2K + t)`.
pub fn posterior_mean(ps: &PosteriorState) -> f64 {
    (ps.k + ps.x_sum as f64) / (2.0 * ps.k + ps.t as f64)
}

/// The ellipse `x² + y²/h² ≤ 1`, i.e. `Q = diag(1, 1/h²)`.
pub fn lower_bound_ellipse(h: f64) -> Result<ConstraintSet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Precondition(format!("ellipse half-axis h must be positive, got {h}")));
    }
    ConstraintSet::ellipsoid(DMatrix::from_diagonal(&Vector::from_column_slice(&[1.0, 1.0 / (h * h)])))
}

fn check_p(p: f64, name: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must lie in (0, 1), got {p}")))
    }
}

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {x}")))
    }
}

/// Minimiser of `⟨w, (2p − 1, −L)⟩` over the ellipse:
/// `(cos φ, h sin φ)` with `tan φ = Lh/(1 − 2p)` and `sin φ > 0`.
pub fn bayes_w(p: f64, h: f64, l: f64) -> Result<Vector> {
    check_p(p, "p")?;
    check_positive(h, "h")?;
    check_positive(l, "L")?;
    let a = l * h;
    let b = 1.0 - 2.0 * p;
    let r = a.hypot(b);
    Ok(Vector::from_column_slice(&[b / r, h * a / r]))
}

/// `E[(P̂_t − P)² | P] = (K²(1−2P)² + tP(1−P)) / (2K+t)²`.
pub fn bayes_error_analytic(k: f64, t: u64, p: f64) -> f64 {
    let denom = (2.0 * k + t as f64).powi(2);
    (k * k * (1.0 - 2.0 * p).powi(2) + t as f64 * p * (1.0 - p)) / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, stderr: (var / n).sqrt(), trials: xs.len() as u64 }
    }

    /// Whether `value` lies within `z` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr + 1e-15
    }
}

/// Simulated `E[(P̂_t − P)² | P]` from binomial draws of `Σ X_i`.
pub fn bayes_error_monte_carlo<R: Rng + ?Sized>(k: f64, t: u64, p: f64, trials: u64, rng: &mut R) -> Result<MonteCarloEstimate> {
    let bin = Binomial::new(t, p).map_err(|e| Error::Precondition(e.to_string()))?;
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let x = bin.sample(rng);
            let phat = (k + x as f64) / (2.0 * k + t as f64);
            (phat - p).powi(2)
        })
        .collect();
    Ok(MonteCarloEstimate::from_samples(&samples))
}

/// `⟨w^{P2} − w^{P1}, f^{P1}⟩` with `f^p = (2p − 1, −L)`.
pub fn p2p1_gap(p1: f64, p2: f64, h: f64, l: f64) -> Result<f64> {
    let w1 = bayes_w(p1, h, l)?;
    let w2 = bayes_w(p2, h, l)?;
    let f1 = Vector::from_column_slice(&[2.0 * p1 - 1.0, -l]);
    Ok((w2 - w1).dot(&f1))
}

/// The lower bound on [`p2p1_gap`]:
/// `(hL/2)·((2P2 − 2P1)/(hL))² / (√(1 + ((1−2P1)/(hL))²)·(1 + ((1−2P2)/(hL))²))`.
pub fn p2p1_lower(p1: f64, p2: f64, h: f64, l: f64) -> Result<f64> {
    check_p(p1, "P1")?;
    check_p(p2, "P2")?;
    check_positive(h, "h")?;
    check_positive(l, "L")?;
    let a = h * l;
    let c1 = (1.0 - 2.0 * p1) / a;
    let c2 = (1.0 - 2.0 * p2) / a;
    let num = ((2.0 * p2 - 2.0 * p1) / a).powi(2);
    Ok(0.5 * a * num / ((1.0 + c1 * c1).sqrt() * (1.0 + c2 * c2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationCheck {
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error of the empirical frequency, evaluated at the
    /// bound (the null rate being tested).
    pub stderr: f64,
    pub trials: u64,
}

impl ConcentrationCheck {
    pub fn holds(&self, z: f64) -> bool {
        self.empirical <= self.bound + z * self.stderr
    }
}

/// Frequency of `|P̂_t − P| > K|1−2P|/(2K+t) + t·u/(2K+t)` against the
/// bound `2·exp(−t u²)`.
pub fn phat_concentration_check<R: Rng + ?Sized>(
    k: f64,
    t: u64,
    p: f64,
    u: f64,
    trials: u64,
    rng: &mut R,
) -> Result<ConcentrationCheck> {
    check_positive(u, "u")?;
    check_positive(k, "K")?;
    if trials == 0 {
        return Err(Error::Precondition("concentration check needs at least one trial".into()));
    }
    let bin = Binomial::new(t, p).map_err(|e| Error::Precondition(e.to_string()))?;
    let denom = 2.0 * k + t as f64;
    let threshold = k / denom * (1.0 - 2.0 * p).abs() + t as f64 / denom * u;
    let hits = (0..trials)
        .filter(|_| {
            let phat = (k + bin.sample(rng) as f64) / denom;
            (phat - p).abs() > threshold
        })
        .count();
    let bound = 2.0 * (-(t as f64) * u * u).exp();
    let b = bound.min(1.0);
    Ok(ConcentrationCheck {
        empirical: hits as f64 / trials as f64,
        bound,
        stderr: (b * (1.0 - b) / trials as f64).sqrt(),
        trials,
    })
}
