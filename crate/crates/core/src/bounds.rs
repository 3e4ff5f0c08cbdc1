//! Closed-form regret guarantees, bound-versus-realised reports, and the
//! Monte-Carlo drivers used for expected-regret statements.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::adversaries::SourceSpec;
use crate::engine::{prefix_regrets, regret_definition, run_game, switch_indicators, GameTrace};
use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::learners::{LearnerKind, LearnerSpec};
use crate::table::{num, Table};

/// Slack in `realized ≤ bound + BOUND_TOL`.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub bound_value: f64,
    pub realized_regret: f64,
    pub satisfied: bool,
    pub params: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new<'a>(
        name: impl Into<String>,
        bound_value: f64,
        realized_regret: f64,
        params: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Self {
        Self {
            bound_name: name.into(),
            bound_value,
            realized_regret,
            satisfied: realized_regret <= bound_value + BOUND_TOL,
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

/// One row per report; the parameter columns are the union of all
/// parameter names, blank where a report lacks one.
pub fn reports_table(reports: &[BoundReport]) -> Table {
    let mut names: Vec<&String> = reports.iter().flat_map(|r| r.params.keys()).collect();
    names.sort();
    names.dedup();
    let mut header = vec!["bound_name", "bound_value", "realized_regret", "satisfied"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend(names.iter().map(|s| s.to_string()));
    let mut t = Table::new(header);
    for r in reports {
        let mut row = vec![r.bound_name.clone(), num(r.bound_value), num(r.realized_regret), r.satisfied.to_string()];
        row.extend(names.iter().map(|k| r.params.get(*k).map(|&v| num(v)).unwrap_or_default()));
        t.push(row);
    }
    t
}

fn positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {x}")))
    }
}

/// `2M²(1 + ln n) / (λ₀ L_n)`.
pub fn curvature_bound(m: f64, lambda0: f64, l_n: f64, n: usize) -> Result<f64> {
    positive(m, "M")?;
    positive(lambda0, "lambda0")?;
    positive(l_n, "L_n")?;
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    Ok(2.0 * m * m * (1.0 + (n as f64).ln()) / (lambda0 * l_n))
}

/// `(2M²/(λ₀L))(1 + ln n) + L·W·Σ_t t·𝕀(‖Θ_t‖₂ ≤ L)`.
pub fn mixed_curvature_bound(trace: &GameTrace, m: f64, lambda0: f64, w: f64, l: f64) -> Result<f64> {
    positive(l, "L")?;
    let head = curvature_bound(m, lambda0, l, trace.n.max(1))?;
    let weight: f64 = trace.rounds.iter().filter(|r| r.theta.norm() <= l).map(|r| r.t as f64).sum();
    Ok(head + l * w * weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedBoundInf {
    /// Best point of the 64-point log grid on `[1e-4·M, M]`.
    pub grid_l: f64,
    pub grid_value: f64,
    /// Infimum over all `L > 0`, and a point attaining (or approaching) it.
    pub exact_l: f64,
    pub exact_value: f64,
}

/// Minimises [`mixed_curvature_bound`] over `L`, both on the log grid and
/// exactly. Between consecutive sorted `‖Θ_t‖` values the indicator sum is
/// constant, so on each piece the bound is `A/L + L·W·s`, minimised at
/// `√(A/(W s))` or at an end of the piece. Below the smallest norm the bound
/// decreases towards `A/L_n`, an infimum that is approached but not attained.
pub fn mixed_curvature_inf(trace: &GameTrace, m: f64, lambda0: f64, w: f64) -> Result<MixedBoundInf> {
    positive(m, "M")?;
    let grid_pts = 64;
    let (lo, hi) = ((1e-4 * m).ln(), m.ln());
    let mut best_grid = (f64::NAN, f64::INFINITY);
    for i in 0..grid_pts {
        let l = (lo + (hi - lo) * i as f64 / (grid_pts - 1) as f64).exp();
        let v = mixed_curvature_bound(trace, m, lambda0, w, l)?;
        if v < best_grid.1 {
            best_grid = (l, v);
        }
    }

    let a = curvature_bound(m, lambda0, 1.0, trace.n.max(1))?;
    let mut pts: Vec<(f64, f64)> = trace.rounds.iter().map(|r| (r.theta.norm(), r.t as f64)).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut consider = |l: f64, v: f64| {
        if v < best.1 {
            best = (l, v);
        }
    };
    if let Some(&(first, _)) = pts.first() {
        if first > 0.0 {
            consider(first, a / first);
        }
    }
    let mut s = 0.0;
    for i in 0..pts.len() {
        s += pts[i].1;
        let left = pts[i].0;
        let right = pts.get(i + 1).map_or(f64::INFINITY, |p| p.0);
        if right <= left || right <= 0.0 {
            continue;
        }
        let left = left.max(f64::MIN_POSITIVE);
        let star = (a / (w * s)).sqrt().clamp(left, right);
        consider(star, a / star + star * w * s);
    }
    Ok(MixedBoundInf { grid_l: best_grid.0, grid_value: best_grid.1, exact_l: best.0, exact_value: best.1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchBound {
    /// `W Σ t·𝕀(w_{t+1} ≠ w_t)·‖Θ_t − Θ_{t−1}‖_∞`.
    pub tight: f64,
    /// `F W Σ 𝕀(w_{t+1} ≠ w_t)`, with `max(F, ‖f_1‖_∞)` charged to a round-one switch.
    pub loose: f64,
    pub switches: usize,
}

/// Switch-count bound for follow-the-leader on a polytope. `w_dual` is the
/// ℓ1 diameter of the set and `f_range` bounds `‖f − f'‖_∞` over the losses.
pub fn polytope_switch_bound(trace: &GameTrace, w_dual: f64, f_range: f64) -> Result<SwitchBound> {
    if !matches!(trace.set.as_ref(), ConstraintSet::Polytope(_)) {
        return Err(Error::Precondition(format!("switch bound needs a polytope, got {}", trace.set.kind())));
    }
    let switches = switch_indicators(trace)?;
    let mut tight = 0.0;
    let mut loose = 0.0;
    let mut prev = crate::geometry::Vector::zeros(trace.dim());
    for (r, &s) in trace.rounds.iter().zip(&switches) {
        if s {
            tight += r.t as f64 * (&r.theta - &prev).amax();
            // t·(Θ_t − Θ_{t−1}) = (mean of f_1..f_{t−1}) − f_t for t ≥ 2, −f_1 at t = 1
            loose += if r.t == 1 { f_range.max(r.f.amax()) } else { f_range };
        }
        prev = r.theta.clone();
    }
    Ok(SwitchBound {
        tight: w_dual * tight,
        loose: w_dual * loose,
        switches: switches.iter().filter(|&&s| s).count(),
    })
}

/// `2MW(1 + 4dM²/r²)`: expected regret of follow-the-leader on a polytope
/// against i.i.d. losses with `‖f‖_∞ ≤ M` whose mean keeps a unique optimal
/// vertex on an ℓ∞ ball of radius `r`.
pub fn stochastic_polytope_bound(m: f64, w_l1: f64, d: usize, r: f64) -> Result<f64> {
    positive(r, "r")?;
    positive(m, "M")?;
    Ok(2.0 * m * w_l1 * (1.0 + 4.0 * d as f64 * m * m / (r * r)))
}

/// `(1/(84√2))·(1/(hL) − 1)`, the coefficient of `ln n` in the minimax lower
/// bound; zero once `hL ≥ 1`.
pub fn lower_bound_rate(h: f64, l: f64) -> Result<f64> {
    positive(h, "h")?;
    positive(l, "L")?;
    let hl = h * l;
    Ok(if hl >= 1.0 { 0.0 } else { (1.0 / hl - 1.0) / (84.0 * std::f64::consts::SQRT_2) })
}

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McRow {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McRow {
    pub fn from_samples(n: usize, xs: &[f64]) -> Self {
        let k = xs.len() as f64;
        let mean = pairwise_sum(xs) / k;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
        let var = if xs.len() > 1 { pairwise_sum(&dev) / (k - 1.0) } else { 0.0 };
        Self { n, mean, stderr: (var / k).sqrt(), trials: xs.len() }
    }
}

pub fn mc_table(rows: &[McRow]) -> Table {
    let mut t = Table::new(["n", "mean", "stderr", "trials"]);
    for r in rows {
        t.push(vec![r.n.to_string(), num(r.mean), num(r.stderr), r.trials.to_string()]);
    }
    t
}

/// Runs `f(trial)` for `trial = 0..trials`, in parallel when the `parallel`
/// feature is on. The output order is the trial order either way.
pub fn map_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials as u64).map(f).collect()
    }
}

fn needs_horizon(spec: &LearnerSpec) -> bool {
    matches!(spec.learner, LearnerKind::Ftsl | LearnerKind::Abprod)
}

/// Regret of `learner` against `source` for every `n` in `n_grid` and every
/// trial, as `samples[trial][grid index]`. Trial `k` uses the source stream
/// `(master_seed, k)` for every grid point, so the shorter games see a
/// prefix of the longer game's losses.
pub fn regret_samples(
    learner: &LearnerSpec,
    source: &SourceSpec,
    set: &Arc<ConstraintSet>,
    n_grid: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::Precondition("n_grid must be non-empty and every n ≥ 1".into()));
    }
    let d = set.dim();
    let m = source.declared_bound(d)?;
    let n_max = *n_grid.iter().max().expect("non-empty");
    map_trials(trials, |trial| {
        if needs_horizon(learner) {
            n_grid
                .iter()
                .map(|&n| {
                    let mut l = learner.build(set, Some(n), m)?;
                    let mut src = source.build(d, master_seed, trial)?;
                    Ok(regret_definition(&run_game(l.as_mut(), &mut src, n, false)?))
                })
                .collect()
        } else {
            let mut l = learner.build(set, Some(n_max), m)?;
            let mut src = source.build(d, master_seed, trial)?;
            let prefix = prefix_regrets(&run_game(l.as_mut(), &mut src, n_max, false)?);
            Ok(n_grid.iter().map(|&n| prefix[n - 1]).collect())
        }
    })
}

/// Mean and standard error of the regret at each horizon of `n_grid`.
pub fn monte_carlo_regret(
    learner: &LearnerSpec,
    source: &SourceSpec,
    set: &Arc<ConstraintSet>,
    n_grid: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<McRow>> {
    if trials < 2 {
        return Err(Error::Precondition("Monte-Carlo estimates need at least 2 trials".into()));
    }
    let samples = regret_samples(learner, source, set, n_grid, trials, master_seed)?;
    Ok(n_grid
        .iter()
        .enumerate()
        .map(|(j, &n)| McRow::from_samples(n, &samples.iter().map(|s| s[j]).collect::<Vec<_>>()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `(1, x)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Degenerate("a line fit needs at least two paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all regressor values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res <= 1e-24 { 1.0 } else { 0.0 };
    Ok(LinearFit { intercept, slope, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    /// `mean ≈ a + b·ln n`
    pub ln_model: LinearFit,
    /// `mean ≈ a + c·√n`
    pub sqrt_model: LinearFit,
}

impl GrowthFit {
    pub fn prefers_ln(&self) -> bool {
        self.ln_model.r2 > self.sqrt_model.r2
    }
}

/// Compares logarithmic and square-root growth of a Monte-Carlo table by R².
pub fn ftrl_stochastic_log_check(table: &[McRow]) -> Result<GrowthFit> {
    if table.len() < 4 {
        return Err(Error::Degenerate(format!(
            "growth fit needs at least 4 grid points, got {}",
            table.len()
        )));
    }
    let y: Vec<f64> = table.iter().map(|r| r.mean).collect();
    let ln: Vec<f64> = table.iter().map(|r| (r.n as f64).ln()).collect();
    let sq: Vec<f64> = table.iter().map(|r| (r.n as f64).sqrt()).collect();
    Ok(GrowthFit { ln_model: linear_fit(&ln, &y)?, sqrt_model: linear_fit(&sq, &y)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{SourceKind, SourceParams};
    use crate::engine::{regret_definition, run_sequence};
    use crate::geometry::{Norm, Vector};
    use crate::learners::Ftl;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn curvature_bound_examples() {
        assert_eq!(curvature_bound(1.0, 1.0, 1.0, 1).unwrap(), 2.0);
        let b = curvature_bound(1.1, 0.07, 0.05, 2500).unwrap();
        assert_relative_eq!(curvature_bound(1.1, 0.07, 0.1, 2500).unwrap(), b / 2.0, epsilon = 1e-12);
        assert!(curvature_bound(1.0, 0.0, 1.0, 10).is_err());
        assert!(curvature_bound(1.0, 1.0, -1.0, 10).is_err());
    }

    #[test]
    fn bound_report_flag_and_table() {
        let r = BoundReport::new("curvature", 2.0, 2.0 + 5e-10, [("M", 1.0), ("n", 10.0)]);
        assert!(r.satisfied);
        let r2 = BoundReport::new("switch", 1.0, 1.1, [("W", 2.0)]);
        assert!(!r2.satisfied);
        let csv = reports_table(&[r, r2]).to_csv_string().unwrap();
        assert!(csv.starts_with("bound_name,bound_value,realized_regret,satisfied,M,W,n\r\n"));
        assert!(csv.contains("switch,1,1.1000000000000001e0,false,,2,\r\n"), "{csv}");
    }

    fn ball_trace(fs: &[Vector]) -> GameTrace {
        let set = Arc::new(ConstraintSet::ball(1.0, fs[0].len()).unwrap());
        run_sequence(&mut Ftl::new(set), fs, true).unwrap()
    }

    #[test]
    fn mixed_bound_reduces_and_saturates() {
        let fs: Vec<Vector> = (0..20).map(|i| v(&[-1.0, 0.1 * (i as f64).sin()])).collect();
        let tr = ball_trace(&fs);
        let l_n = tr.min_theta_norm();
        let below = 0.5 * l_n;
        assert_relative_eq!(
            mixed_curvature_bound(&tr, 1.0, 1.0, 2.0, below).unwrap(),
            curvature_bound(1.0, 1.0, below, 20).unwrap(),
            epsilon = 1e-12
        );
        let above = 10.0;
        assert_relative_eq!(
            mixed_curvature_bound(&tr, 1.0, 1.0, 2.0, above).unwrap(),
            curvature_bound(1.0, 1.0, above, 20).unwrap() + above * 2.0 * 210.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn mixed_inf_is_below_the_pure_curvature_bound() {
        let fs: Vec<Vector> = (0..200).map(|i| v(&[0.1 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()])).collect();
        let tr = ball_trace(&fs);
        let inf = mixed_curvature_inf(&tr, 1.2, 1.0, 2.0).unwrap();
        let pure = curvature_bound(1.2, 1.0, tr.min_theta_norm(), 200).unwrap();
        assert!(inf.exact_value <= pure * (1.0 + 1e-12));
        assert!(inf.exact_value <= inf.grid_value * (1.0 + 1e-12));
        // brute-force check of the exact infimum on a fine grid
        let mut best = f64::INFINITY;
        for i in 0..20_000 {
            let l = (1e-6f64.ln() + (10f64.ln() - 1e-6f64.ln()) * i as f64 / 19_999.0).exp();
            best = best.min(mixed_curvature_bound(&tr, 1.2, 1.0, 2.0, l).unwrap());
        }
        assert!(inf.exact_value <= best + 1e-9 && best <= inf.exact_value * 1.01, "{inf:?} vs {best}");
    }

    #[test]
    fn switch_bounds_on_polytopes() {
        let seg = Arc::new(ConstraintSet::polytope(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap());
        let n = 50;
        let mut src = SourceSpec::worst_case().build(2, 0, 0).unwrap();
        let tr = run_game(&mut Ftl::new(seg.clone()), &mut src, n, true).unwrap();
        let w = seg.diameter(Norm::L1);
        let f_range = 2.0;
        let b = polytope_switch_bound(&tr, w, f_range).unwrap();
        assert_eq!(b.switches, n);
        assert_relative_eq!(b.loose, f_range * w * n as f64, epsilon = 1e-12);
        let r = regret_definition(&tr);
        assert!(r <= b.tight + 1e-9 && b.tight <= b.loose + 1e-9, "{r} {b:?}");

        let ball_tr = ball_trace(&[v(&[1.0, 0.0])]);
        assert!(polytope_switch_bound(&ball_tr, 2.0, 2.0).is_err());

        // a constant loss on the simplex: one switch at t = 1, nothing after
        let simplex = Arc::new(ConstraintSet::simplex(3).unwrap());
        let tr = run_sequence(&mut Ftl::new(simplex), &vec![v(&[0.1, 0.5, 0.9]); 30], true).unwrap();
        let b = polytope_switch_bound(&tr, 2.0, 0.0).unwrap();
        assert_eq!(b.switches, 0);
        assert_eq!(regret_definition(&tr), 0.0);
    }

    #[test]
    fn stochastic_polytope_examples() {
        assert_eq!(stochastic_polytope_bound(1.0, 2.0, 3, 1.0).unwrap(), 52.0);
        assert!(stochastic_polytope_bound(1.0, 2.0, 3, 0.5).unwrap() > 52.0);
        assert!(stochastic_polytope_bound(1.0, 2.0, 3, 0.0).is_err());
    }

    #[test]
    fn lower_bound_rate_examples() {
        assert_eq!(lower_bound_rate(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(lower_bound_rate(2.0, 0.9).unwrap(), 0.0);
        assert_relative_eq!(lower_bound_rate(0.5, 0.5).unwrap(), 3.0 / (84.0 * 2f64.sqrt()), epsilon = 1e-15);
        assert!((lower_bound_rate(0.5, 0.5).unwrap() - 0.02525).abs() < 1e-5);
    }

    #[test]
    fn zero_loss_source_has_zero_regret() {
        let set = Arc::new(ConstraintSet::ball(1.0, 3).unwrap());
        let src = SourceSpec::new(SourceKind::Constant, SourceParams { f: Some(vec![0.0; 3]), ..Default::default() });
        let rows = monte_carlo_regret(&LearnerSpec::new(LearnerKind::Ftl), &src, &set, &[5, 10], 4, 1).unwrap();
        assert!(rows.iter().all(|r| r.mean == 0.0 && r.stderr == 0.0));
        assert!(monte_carlo_regret(&LearnerSpec::new(LearnerKind::Ftl), &src, &set, &[5], 1, 1).is_err());
    }

    #[test]
    fn prefix_shortcut_matches_separate_games() {
        let set = Arc::new(ConstraintSet::ball(1.0, 3).unwrap());
        let src = SourceSpec::stochastic(0.2);
        let grid = [10, 40, 90];
        let fast = regret_samples(&LearnerSpec::new(LearnerKind::Ftrl), &src, &set, &grid, 3, 5).unwrap();
        for (trial, row) in fast.iter().enumerate() {
            for (j, &n) in grid.iter().enumerate() {
                let mut l = LearnerSpec::new(LearnerKind::Ftrl).build(&set, Some(n), 1.2).unwrap();
                let mut s = src.build(3, 5, trial as u64).unwrap();
                let r = regret_definition(&run_game(l.as_mut(), &mut s, n, false).unwrap());
                assert_relative_eq!(row[j], r, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn growth_fit_synthetic() {
        let grid = [100usize, 200, 400, 800, 1600];
        let ln_rows: Vec<McRow> =
            grid.iter().map(|&n| McRow { n, mean: 3.0 + 2.0 * (n as f64).ln(), stderr: 0.0, trials: 2 }).collect();
        let fit = ftrl_stochastic_log_check(&ln_rows).unwrap();
        assert_relative_eq!(fit.ln_model.r2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.ln_model.slope, 2.0, epsilon = 1e-12);
        assert!(fit.prefers_ln());
        let sq_rows: Vec<McRow> = grid.iter().map(|&n| McRow { n, mean: 0.7 * (n as f64).sqrt(), stderr: 0.0, trials: 2 }).collect();
        let fit = ftrl_stochastic_log_check(&sq_rows).unwrap();
        assert!(!fit.prefers_ln());
        assert!(ftrl_stochastic_log_check(&sq_rows[..3]).is_err());
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs = vec![0.1; 10_000];
        assert!((pairwise_sum(&xs) - 1000.0).abs() < 1e-10);
    }
}
