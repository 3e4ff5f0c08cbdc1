//! Realised regret against the closed-form guarantees.

use std::sync::Arc;

use rand::Rng;

use crate::adversaries::{lower_bound_ellipse, SourceKind, SourceParams, SourceSpec};
use crate::bounds::{
    curvature_bound, linear_fit, lower_bound_rate, map_trials, mixed_curvature_inf, monte_carlo_regret,
    polytope_switch_bound, stochastic_polytope_bound, McRow, BOUND_TOL,
};
use crate::engine::{regret_definition, run_game, run_sequence, GameTrace};
use crate::error::Result;
use crate::geometry::{ConstraintSet, Norm, Vector};
use crate::learners::{AbProd, AbProdParams, Ftl, Ftrl, LearnerKind, LearnerSpec, OnlineLearner};
use crate::rng::substream;

use super::{guard, CheckOutcome};

pub fn default_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        guard("curvature_bound", curvature_dominance(100, 2500, 0.1, seed)),
        guard("mixed_curvature_inf", mixed_bound_inf(20, 2500, 0.1, seed)),
        guard("polytope_switch_chain", polytope_switch_chain(30, 1000, seed)),
        guard("abprod_allowance", abprod_allowance(2500, seed)),
        guard("worst_case_linear", worst_case_linear(1250, 2500, seed)),
        guard("stochastic_polytope", stochastic_polytope(100, 1000, 2000, seed)),
        guard("lower_bound_slope", lower_bound_slope(400, seed)),
    ]
}

fn reference_ftl_traces(seeds: usize, n: usize, l: f64, seed: u64) -> Result<(Vec<GameTrace>, f64)> {
    let set = Arc::new(ConstraintSet::reference_ellipsoid());
    let source = SourceSpec::stochastic(l);
    let m = source.declared_bound(set.dim())?;
    let traces = map_trials(seeds, |trial| {
        let mut learner = Ftl::new(set.clone()).with_loss_bound(m);
        let mut src = source.build(set.dim(), seed, trial)?;
        run_game(&mut learner, &mut src, n, false)
    })?;
    Ok((traces, m))
}

/// FTL on the reference ellipsoid against stochastic data with offset `l`:
/// on every seed the regret is at most `2M²(1 + ln n)/(λ₀L_n)` with `L_n`
/// the realised `min_t ‖Θ_t‖` and `M = 1 + l`.
pub fn curvature_dominance(seeds: usize, n: usize, l: f64, seed: u64) -> Result<CheckOutcome> {
    let (traces, m) = reference_ftl_traces(seeds, n, l, seed)?;
    let lambda0 = traces[0].set.min_principal_curvature().expect("smooth set");
    let mut violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    for trace in &traces {
        let regret = regret_definition(trace);
        let bound = curvature_bound(m, lambda0, trace.min_theta_norm(), n)?;
        worst_ratio = worst_ratio.max(regret / bound);
        if regret > bound + BOUND_TOL {
            violations += 1;
        }
    }
    Ok(CheckOutcome::new(
        "curvature_bound",
        violations == 0,
        format!("{seeds} seeds, n = {n}, M = {m}: {violations} violations, largest regret/bound {worst_ratio:.3e}"),
    ))
}

/// The infimum over `L` of the mixed bound is never above the curvature
/// bound at `L_n`, and the realised regret stays below it.
pub fn mixed_bound_inf(seeds: usize, n: usize, l: f64, seed: u64) -> Result<CheckOutcome> {
    let (traces, m) = reference_ftl_traces(seeds, n, l, seed)?;
    let set = &traces[0].set;
    let lambda0 = set.min_principal_curvature().expect("smooth set");
    let w = set.diameter(Norm::L2);
    let mut failures = 0usize;
    let mut grid_above = 0usize;
    for trace in &traces {
        let inf = mixed_curvature_inf(trace, m, lambda0, w)?;
        let plain = curvature_bound(m, lambda0, trace.min_theta_norm(), n)?;
        let regret = regret_definition(trace);
        if inf.exact_value > plain * (1.0 + 1e-12) || regret > inf.exact_value + BOUND_TOL {
            failures += 1;
        }
        if inf.grid_value > plain {
            grid_above += 1;
        }
    }
    Ok(CheckOutcome::new(
        "mixed_curvature_inf",
        failures == 0,
        format!("{seeds} seeds: {failures} failures; the 64-point grid minimum exceeded the curvature bound on {grid_above}"),
    ))
}

/// Regret ≤ tight switch bound ≤ loose switch bound for FTL on the simplex,
/// against uniform-box data and against random 0/1 losses.
pub fn polytope_switch_chain(games: usize, n: usize, seed: u64) -> Result<CheckOutcome> {
    let set = Arc::new(ConstraintSet::simplex(3)?);
    let w = set.diameter(Norm::L1);
    let uniform = SourceSpec::new(
        SourceKind::UniformBox,
        SourceParams { mean: Some(vec![0.0, 0.5, 0.5]), half_width: Some(0.5), ..Default::default() },
    );
    let mut rng = substream(seed, 0x2b01);
    let mut failures = 0usize;
    let mut switches = 0usize;
    for g in 0..games {
        let losses: Vec<Vector> = if g % 2 == 0 {
            uniform.build(3, seed, g as u64)?.take(n)
        } else {
            (0..n).map(|_| Vector::from_fn(3, |_, _| rng.random_range(0..2u8) as f64)).collect()
        };
        // sup ‖f − f'‖_∞ over the realised losses
        let f_range = (0..3)
            .map(|i| {
                let (lo, hi) = losses.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), f| (a.min(f[i]), b.max(f[i])));
                hi - lo
            })
            .fold(0.0, f64::max);
        let mut learner = Ftl::new(set.clone());
        let trace = run_sequence(&mut learner, &losses, false)?;
        let b = polytope_switch_bound(&trace, w, f_range)?;
        let regret = regret_definition(&trace);
        switches += b.switches;
        if regret > b.tight + BOUND_TOL || b.tight > b.loose + BOUND_TOL {
            failures += 1;
        }
    }
    Ok(CheckOutcome::new(
        "polytope_switch_chain",
        failures == 0,
        format!("{games} games of {n} rounds, {switches} switches in total: {failures} chain failures"),
    ))
}

fn play(learner: &mut dyn OnlineLearner, source: &SourceSpec, set: &ConstraintSet, n: usize, seed: u64) -> Result<f64> {
    let mut src = source.build(set.dim(), seed, 0)?;
    Ok(regret_definition(&run_game(learner, &mut src, n, true)?))
}

/// `(A,B)-prod(FTL, FTRL)` never trails FTRL by more than `C·ln 2/η`, on
/// worst-case and stochastic data, on a ball and on the reference
/// ellipsoid.
pub fn abprod_allowance(n: usize, seed: u64) -> Result<CheckOutcome> {
    let sets = [Arc::new(ConstraintSet::ball(1.0, 4)?), Arc::new(ConstraintSet::reference_ellipsoid())];
    let sources = [SourceSpec::worst_case(), SourceSpec::stochastic(0.1)];
    let mut lines = Vec::new();
    let mut passed = true;
    for set in &sets {
        for source in &sources {
            let m = source.declared_bound(set.dim())?;
            let ftrl = play(&mut Ftrl::new(set.clone())?, source, set, n, seed)?;
            let a: Box<dyn OnlineLearner> = Box::new(Ftl::new(set.clone()));
            let b: Box<dyn OnlineLearner> = Box::new(Ftrl::new(set.clone())?);
            let mut ab = AbProd::new(a, b, set.clone(), n, m, AbProdParams::default())?;
            let allowance = ab.regret_to_b_allowance();
            let regret = play(&mut ab, source, set, n, seed)?;
            passed &= regret <= ftrl + allowance + BOUND_TOL;
            lines.push(format!(
                "{}/{}: ab {regret:.3} vs ftrl {ftrl:.3} + {allowance:.3}",
                set.kind(),
                source.adversary.as_str()
            ));
        }
    }
    Ok(CheckOutcome::new("abprod_allowance", passed, format!("n = {n}; {}", lines.join("; "))))
}

/// Worst-case data forces linear FTL regret: `R_n/n` at `n_half` and `n`
/// on the reference ellipsoid both exceed 0.1 and agree to 1%.
pub fn worst_case_linear(n_half: usize, n: usize, seed: u64) -> Result<CheckOutcome> {
    let set = Arc::new(ConstraintSet::reference_ellipsoid());
    let rows = monte_carlo_regret(
        &LearnerSpec::new(LearnerKind::Ftl),
        &SourceSpec::worst_case(),
        &set,
        &[n_half, n],
        2,
        seed,
    )?;
    let (a, b) = (rows[0].mean / n_half as f64, rows[1].mean / n as f64);
    Ok(CheckOutcome::new(
        "worst_case_linear",
        a > 0.1 && b > 0.1 && (a - b).abs() <= 0.01 * b,
        format!("regret/n = {a:.6} at n = {n_half}, {b:.6} at n = {n}"),
    ))
}

/// Margin of the simplex experiment: the mean `(0, ½, ½)` keeps `e₁` as the
/// unique optimum under any perturbation of ℓ∞ size below ¼.
pub const SIMPLEX_MARGIN: f64 = 0.24;

/// The simplex experiment's source: uniform noise of half-width ½ around
/// `(0, ½, ½)`, so `‖f‖_∞ ≤ 1`.
pub fn simplex_source() -> SourceSpec {
    SourceSpec::new(
        SourceKind::UniformBox,
        SourceParams { mean: Some(vec![0.0, 0.5, 0.5]), half_width: Some(0.5), ..Default::default() },
    )
}

/// FTL on the 3-simplex with i.i.d. losses: mean regret at `n2` is below
/// `2MW(1 + 4dM²/r²)` and within 3 pooled standard errors of the mean at
/// `n1`.
pub fn stochastic_polytope(trials: usize, n1: usize, n2: usize, seed: u64) -> Result<CheckOutcome> {
    let set = Arc::new(ConstraintSet::simplex(3)?);
    let rows = monte_carlo_regret(&LearnerSpec::new(LearnerKind::Ftl), &simplex_source(), &set, &[n1, n2], trials, seed)?;
    let bound = stochastic_polytope_bound(1.0, set.diameter(Norm::L1), 3, SIMPLEX_MARGIN)?;
    let pooled = rows[0].stderr.hypot(rows[1].stderr);
    let diff = (rows[1].mean - rows[0].mean).abs();
    Ok(CheckOutcome::new(
        "stochastic_polytope",
        rows[1].mean <= bound && diff <= 3.0 * pooled,
        format!(
            "{trials} trials: mean {:.4} at n = {n1}, {:.4} at n = {n2} (pooled stderr {pooled:.4}); bound {bound:.2}",
            rows[0].mean, rows[1].mean
        ),
    ))
}

/// Horizons `2⁷..2¹³` of the lower-bound experiment.
pub const LOWER_BOUND_GRID: [usize; 7] = [128, 256, 512, 1024, 2048, 4096, 8192];

/// Mean FTL regret under Beta-Bernoulli data (K = 1, h = L = ½) at the
/// horizons of [`LOWER_BOUND_GRID`].
pub fn lower_bound_table(trials: usize, seed: u64) -> Result<Vec<McRow>> {
    let (h, l) = (0.5, 0.5);
    let set = Arc::new(lower_bound_ellipse(h)?);
    let source = SourceSpec::new(
        SourceKind::BetaBernoulli,
        SourceParams { l: Some(l), k: Some(1.0), ..Default::default() },
    );
    monte_carlo_regret(&LearnerSpec::new(LearnerKind::Ftl), &source, &set, &LOWER_BOUND_GRID, trials, seed)
}

/// The slope of mean regret against `ln n` is at least the lower-bound
/// rate `(1/(hL) − 1)/(84√2)`.
pub fn lower_bound_slope(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let rows = lower_bound_table(trials, seed)?;
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = linear_fit(&x, &y)?;
    let rate = lower_bound_rate(0.5, 0.5)?;
    Ok(CheckOutcome::new(
        "lower_bound_slope",
        fit.slope > 0.0 && fit.slope >= rate,
        format!("{trials} trials: slope {:.4} per ln n (R² {:.3}) vs rate {rate:.5}", fit.slope, fit.r2),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        for o in default_checks(17) {
            assert!(o.passed, "{o}");
        }
    }
}
