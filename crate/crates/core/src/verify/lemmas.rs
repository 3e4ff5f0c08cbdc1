//! Inequalities used inside the regret proofs, checked on random instances,
//! and the posterior calculations behind the lower-bound construction.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::adversaries::{
    bayes_error_analytic, bayes_error_monte_carlo, bayes_w, p2p1_gap, p2p1_lower, phat_concentration_check,
    posterior_mean, MonteCarloEstimate, PosteriorState,
};
use crate::error::{Error, Result};
use crate::geometry::sampling::{boundary_point, random_spd, unit_vector};
use crate::geometry::{ConstraintSet, Vector};
use crate::learners::{Ftsl, OnlineLearner};
use crate::rng::substream;

use super::{guard, CheckOutcome};

pub fn default_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        guard("bayes_error", bayes_error_grid(100_000, seed)),
        guard("phat_concentration", concentration_grid(20_000, seed)),
        guard("p2p1_loss", p2p1_sweep(100_000, seed)),
        guard("posterior_conjugacy", posterior_conjugacy(100_000, seed)),
        guard("bayes_w_optimal", bayes_w_optimal(10_000, seed)),
        guard("cosine_gap", cosine_gap(100_000, seed)),
        guard("middle_theta", middle_theta(10_000, seed)),
        guard("ftsl_steps", ftsl_steps(10_000, seed)),
    ]
}

/// Analytic `E[(P̂_t − P)²]` against simulation on
/// `(K, t, P) ∈ {1,2} × {10,100} × {0.3,0.5,0.7}`, within 3 standard errors.
pub fn bayes_error_grid(trials: u64, seed: u64) -> Result<CheckOutcome> {
    let mut worst_z: f64 = 0.0;
    let mut failed = Vec::new();
    let mut cell = 0u64;
    for k in [1.0, 2.0] {
        for t in [10u64, 100] {
            for p in [0.3, 0.5, 0.7] {
                let mut rng = substream(seed, 0x1e00 + cell);
                cell += 1;
                let mc = bayes_error_monte_carlo(k, t, p, trials, &mut rng)?;
                let exact = bayes_error_analytic(k, t, p);
                worst_z = worst_z.max((mc.mean - exact).abs() / mc.stderr);
                if !mc.agrees_with(exact, 3.0) {
                    failed.push(format!("(K={k}, t={t}, P={p})"));
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        "bayes_error",
        failed.is_empty(),
        format!("12 cells x {trials} draws: worst |z| {worst_z:.2}; outside 3 stderr: [{}]", failed.join(", ")),
    ))
}

/// Empirical tail frequency of `P̂_t` against `2exp(−tu²)` plus 3 binomial
/// standard errors, on a grid of `(K, t, P, u)`.
pub fn concentration_grid(trials: u64, seed: u64) -> Result<CheckOutcome> {
    let mut failed = Vec::new();
    let mut cells = 0u64;
    let mut tightest: f64 = f64::INFINITY;
    for k in [1.0, 2.0] {
        for t in [10u64, 100, 1000] {
            for p in [0.1, 0.3, 0.5] {
                for u in [0.05, 0.1, 0.2, 0.4] {
                    let mut rng = substream(seed, 0x1f00 + cells);
                    cells += 1;
                    let c = phat_concentration_check(k, t, p, u, trials, &mut rng)?;
                    tightest = tightest.min(c.bound.min(1.0) + 3.0 * c.stderr - c.empirical);
                    if !c.holds(3.0) {
                        failed.push(format!("(K={k}, t={t}, P={p}, u={u}): {} > {}", c.empirical, c.bound));
                    }
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        "phat_concentration",
        failed.is_empty(),
        format!("{cells} cells x {trials} draws: smallest slack {tightest:.4}; failures [{}]", failed.join("; ")),
    ))
}

/// `gap ≥ lower − 1e-12` on random `(P1, P2, h, L)` with `h, L ∈ (0, 1)`.
pub fn p2p1_sweep(tuples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e20);
    let mut worst = f64::INFINITY;
    for _ in 0..tuples {
        let p1 = rng.random_range(1e-6..1.0 - 1e-6);
        let p2 = rng.random_range(1e-6..1.0 - 1e-6);
        let h = rng.random_range(0.01..1.0);
        let l = rng.random_range(0.01..1.0);
        worst = worst.min(p2p1_gap(p1, p2, h, l)? - p2p1_lower(p1, p2, h, l)?);
    }
    Ok(CheckOutcome::new(
        "p2p1_loss",
        worst >= -1e-12,
        format!("{tuples} random tuples: smallest gap - lower {worst:.3e}"),
    ))
}

/// `(K + Σx)/(2K + t)` against the sample mean of the conjugate posterior
/// `Beta(K + Σx, K + t − Σx)`.
pub fn posterior_conjugacy(draws: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e30);
    let mut failed = Vec::new();
    let mut cases = 0;
    for k in [0.5, 1.0, 3.0] {
        for (t, x_sum) in [(0u64, 0u64), (3, 3), (10, 2), (100, 71)] {
            cases += 1;
            let ps = PosteriorState { k, t, x_sum };
            let beta = Beta::new(k + x_sum as f64, k + (t - x_sum) as f64)
                .map_err(|e| Error::Precondition(e.to_string()))?;
            let xs: Vec<f64> = (0..draws).map(|_| beta.sample(&mut rng)).collect();
            let mc = MonteCarloEstimate::from_samples(&xs);
            if !mc.agrees_with(posterior_mean(&ps), 3.0) {
                failed.push(format!("(K={k}, t={t}, x={x_sum})"));
            }
        }
    }
    Ok(CheckOutcome::new(
        "posterior_conjugacy",
        failed.is_empty(),
        format!("{cases} posteriors x {draws} draws; outside 3 stderr: [{}]", failed.join(", ")),
    ))
}

/// `w^p` beats every sampled boundary point of the ellipse on `f^p`.
pub fn bayes_w_optimal(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e40);
    let mut worst = f64::INFINITY;
    for &(p, h, l) in &[(0.7, 0.5, 0.5), (0.2, 0.3, 0.8), (0.5, 1.0, 0.1), (0.95, 2.0, 0.4)] {
        let set = crate::adversaries::lower_bound_ellipse(h)?;
        let f = Vector::from_column_slice(&[2.0 * p - 1.0, -l]);
        let best = bayes_w(p, h, l)?.dot(&f);
        for _ in 0..samples {
            let w = boundary_point(&set, &mut rng).expect("smooth set");
            worst = worst.min(w.dot(&f) - best);
        }
    }
    Ok(CheckOutcome::new(
        "bayes_w_optimal",
        worst >= -1e-12,
        format!("4 (p, h, L) x {samples} boundary points: smallest excess {worst:.3e}"),
    ))
}

/// `1 − cos∠(θ₁, θ₂) ≤ ½‖θ₁ − θ₂‖²/(‖θ₁‖‖θ₂‖)` for random non-zero pairs.
pub fn cosine_gap(pairs: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e50);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pairs {
        let d = 2 + i % 5;
        let a = unit_vector(d, &mut rng) * 10f64.powf(rng.random_range(-3.0..3.0));
        let b = unit_vector(d, &mut rng) * 10f64.powf(rng.random_range(-3.0..3.0));
        let (na, nb) = (a.norm(), b.norm());
        let lhs = 1.0 - a.dot(&b) / (na * nb);
        let rhs = 0.5 * (&a - &b).norm_squared() / (na * nb);
        worst = worst.max(lhs - rhs);
    }
    Ok(CheckOutcome::new(
        "cosine_gap",
        worst <= 1e-12,
        format!("{pairs} random pairs: largest excess {worst:.3e}"),
    ))
}

/// `⟨w⁽¹⁾ − w⁽²⁾, θ₁⟩ ≤ (1/(2λ₀))‖θ₂ − θ₁‖²/‖θ₂‖` with `w⁽ⁱ⁾` the support
/// maximisers, on a ball, the reference ellipsoid and a random ellipsoid.
pub fn middle_theta(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e60);
    let sets = [
        ConstraintSet::ball(0.8, 3)?,
        ConstraintSet::reference_ellipsoid(),
        ConstraintSet::ellipsoid(random_spd(3, 0.3, 4.0, &mut rng))?,
    ];
    let mut worst = f64::NEG_INFINITY;
    for set in &sets {
        let lambda0 = set.min_principal_curvature().expect("smooth set");
        let d = set.dim();
        for _ in 0..samples {
            let t1 = unit_vector(d, &mut rng) * rng.random_range(0.01..3.0);
            // mostly nearby pairs, where the bound is informative
            let spread = 10f64.powf(rng.random_range(-4.0..0.5));
            let t2 = &t1 + unit_vector(d, &mut rng) * spread;
            if t2.norm() == 0.0 {
                continue;
            }
            let w1 = set.support(&t1)?.maximizer;
            let w2 = set.support(&t2)?.maximizer;
            let lhs = (w1 - w2).dot(&t1);
            let rhs = (&t2 - &t1).norm_squared() / (2.0 * lambda0 * t2.norm());
            worst = worst.max(lhs - rhs);
        }
    }
    Ok(CheckOutcome::new(
        "middle_theta",
        worst <= 1e-9,
        format!("3 sets x {samples} pairs: largest excess {worst:.3e}"),
    ))
}

/// Worst one-step potential change of FTSL,
/// `max_f √(‖F + f‖² + t + 1) + ⟨f, w_t⟩ − √(‖F‖² + t)` over unit `f`.
/// Only the component `a = ⟨f, F/‖F‖⟩` matters; the objective is concave in
/// `a`, so golden-section search plus both endpoints finds the maximum.
pub fn ftsl_step_delta(big_f: &Vector, w: &Vector, t: usize) -> f64 {
    let d = big_f.len();
    let norm = big_f.norm();
    let dir = if norm > 0.0 { big_f / norm } else { crate::geometry::unit(d, 0) };
    // any unit vector orthogonal to dir
    let mut omega = crate::geometry::unit(d, if dir[0].abs() < 0.9 { 0 } else { 1 });
    omega -= &dir * omega.dot(&dir);
    omega.normalize_mut();
    let base = (norm * norm + t as f64).sqrt();
    let value = |a: f64| {
        let b = (1.0 - a * a).max(0.0).sqrt();
        let f = &dir * a + &omega * b;
        ((big_f + &f).norm_squared() + t as f64 + 1.0).sqrt() + f.dot(w) - base
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut v1, mut v2) = (value(x1), value(x2));
    for _ in 0..80 {
        if v1 < v2 {
            lo = x1;
            x1 = x2;
            v1 = v2;
            x2 = lo + phi * (hi - lo);
            v2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            v2 = v1;
            x1 = hi - phi * (hi - lo);
            v1 = value(x1);
        }
    }
    [value(-1.0), value(1.0), v1, v2].into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// FTSL step inequalities on random `(F, t)`: `Δ_t ≤ 1/√t` always and
/// `Δ_t ≤ 1/((t−1)L)` whenever `‖F‖ ≥ (t−1)L`, both to 1e-9. `t` is
/// log-uniform on `[2, 10⁴]`, `‖F‖` uniform on `[0, t − 1]`, and `w_t`
/// comes from an FTSL learner driven to round `t` on the unit ball in
/// dimension 4.
pub fn ftsl_steps(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1e70);
    let set = Arc::new(ConstraintSet::ball(1.0, 4)?);
    let horizon = 1_000_000;
    let (mut worst1, mut worst2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut premise = 0usize;
    for _ in 0..instances {
        let t = (rng.random_range(2f64.ln()..1e4f64.ln()).exp().round() as usize).clamp(2, 10_000);
        let target = unit_vector(4, &mut rng) * rng.random_range(0.0..(t - 1) as f64);
        let mut learner = Ftsl::new(set.clone(), horizon)?;
        super::drive_to(&mut learner, &target, t)?;
        let big_f = learner.state().cumulative().clone();
        let w = learner.predict()?;
        let delta = ftsl_step_delta(&big_f, &w, t);
        worst1 = worst1.max(delta - 1.0 / (t as f64).sqrt());
        let l: f64 = rng.random_range(0.0..1.0);
        if l > 0.0 && big_f.norm() >= (t - 1) as f64 * l {
            premise += 1;
            worst2 = worst2.max(delta - 1.0 / ((t - 1) as f64 * l));
        }
    }
    Ok(CheckOutcome::new(
        "ftsl_steps",
        worst1 <= 1e-9 && worst2 <= 1e-9 && premise > 0,
        format!(
            "{instances} instances: largest excess over 1/sqrt(t) {worst1:.3e}; \
             {premise} with |F| >= (t-1)L, largest excess over 1/((t-1)L) {worst2:.3e}"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        for o in default_checks(13) {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn step_delta_matches_the_centre_value() {
        // the maximum sits at a = 0 when w_t is the FTSL play
        let f = Vector::from_column_slice(&[3.0, 4.0, 0.0, 0.0]);
        let t = 9;
        let sigma = Ftsl::shrinkage(5.0, t, 100);
        let w = -&f * (sigma / 5.0);
        let expect = (25.0f64 + t as f64 + 2.0).sqrt() - (25.0f64 + t as f64).sqrt();
        assert!((ftsl_step_delta(&f, &w, t) - expect).abs() < 1e-12);
    }
}
