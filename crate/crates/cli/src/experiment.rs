//! Runs a configured experiment and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use ftl_arena::bounds::{
    curvature_bound, ftrl_stochastic_log_check, mc_table, mixed_curvature_inf, polytope_switch_bound,
    regret_samples, reports_table, BoundReport, McRow,
};
use ftl_arena::engine::{regret_definition, run_game, write_trace_csv, GameTrace};
use ftl_arena::learners::LearnerKind;
use ftl_arena::table::{num, Table};
use ftl_arena::{ConstraintSet, Norm};

use crate::config::{ExperimentConfig, SourceVariant};
use crate::svg::{self, Series};
use crate::CliError;

/// Mean regret over the horizon grid for one learner against one source
/// variant.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub label: String,
    pub learner: usize,
    pub source: usize,
    pub rows: Vec<McRow>,
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// File-name-safe version of a series label.
pub fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') { c } else { '_' })
        .collect()
}

fn series_label(cfg: &ExperimentConfig, learner: usize, source: &SourceVariant) -> String {
    format!("{}{}", cfg.learners[learner].label(), source.suffix)
}

pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<SeriesResult>, CliError> {
    let grid = cfg.horizons();
    let mut out = Vec::new();
    for (si, source) in cfg.sources.iter().enumerate() {
        for (li, learner) in cfg.learners.iter().enumerate() {
            let label = series_label(cfg, li, source);
            log::info!("{label}: {} trials over {} horizons", cfg.trials, grid.len());
            let samples = regret_samples(learner, &source.spec, &cfg.set, &grid, cfg.trials, seed).map_err(runtime)?;
            let rows = grid
                .iter()
                .enumerate()
                .map(|(j, &n)| McRow::from_samples(n, &samples.iter().map(|s| s[j]).collect::<Vec<_>>()))
                .collect();
            out.push(SeriesResult { label, learner: li, source: si, rows });
        }
    }
    Ok(out)
}

fn write_table(dir: &Path, file: &str, table: &Table) -> Result<PathBuf, CliError> {
    let path = dir.join(file);
    let f = fs::File::create(&path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    table.write(std::io::BufWriter::new(f)).map_err(runtime)?;
    Ok(path)
}

/// `n, learner, mean_regret, stderr`; the standard error is left blank for
/// single-trial runs.
pub fn summary_table(results: &[SeriesResult]) -> Table {
    let mut t = Table::new(["n", "learner", "mean_regret", "stderr"]);
    for r in results {
        for row in &r.rows {
            let se = if row.trials > 1 { num(row.stderr) } else { String::new() };
            t.push(vec![row.n.to_string(), r.label.clone(), num(row.mean), se]);
        }
    }
    t
}

fn write_svgs(cfg: &ExperimentConfig, dir: &Path, results: &[SeriesResult]) -> Result<Vec<PathBuf>, CliError> {
    let series: Vec<Series> = results
        .iter()
        .map(|r| Series {
            label: r.label.clone(),
            points: r
                .rows
                .iter()
                .map(|row| (row.n as f64, row.mean, if row.trials > 1 { row.stderr } else { 0.0 }))
                .collect(),
        })
        .collect();
    let mut paths = Vec::new();
    for &axis in &cfg.outputs.axes {
        let path = dir.join(format!("{}.svg", axis.file_stem()));
        fs::write(&path, svg::render(&cfg.name, axis, &series)).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Trial-0 game of one series at the largest horizon.
fn trace_for(cfg: &ExperimentConfig, learner: usize, source: usize, seed: u64) -> Result<GameTrace, CliError> {
    let d = cfg.set.dim();
    let spec = &cfg.sources[source].spec;
    let m = spec.declared_bound(d).map_err(runtime)?;
    let n = cfg.n_max();
    let mut l = cfg.learners[learner].build(&cfg.set, Some(n), m).map_err(runtime)?;
    let mut src = spec.build(d, seed, 0).map_err(runtime)?;
    run_game(l.as_mut(), &mut src, n, true).map_err(runtime)
}

/// Guarantees that apply to a follow-the-leader trace: the curvature bound
/// and the infimum of the mixed bound on smooth sets, the switch bounds on
/// polytopes.
fn ftl_reports(trace: &GameTrace, m: f64, label: &str) -> Result<Vec<BoundReport>, CliError> {
    let regret = regret_definition(trace);
    let n = trace.n as f64;
    let mut out = Vec::new();
    match trace.set.as_ref() {
        ConstraintSet::Polytope(_) => {
            let d = trace.dim();
            let f_range = (0..d)
                .map(|i| {
                    let (lo, hi) = trace
                        .rounds
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.f[i]), b.max(r.f[i])));
                    hi - lo
                })
                .fold(0.0, f64::max);
            let w = trace.set.diameter(Norm::L1);
            let b = polytope_switch_bound(trace, w, f_range).map_err(runtime)?;
            let params = [("n", n), ("W_l1", w), ("F_linf", f_range), ("switches", b.switches as f64)];
            out.push(BoundReport::new(format!("{label}:switch_tight"), b.tight, regret, params));
            out.push(BoundReport::new(format!("{label}:switch_loose"), b.loose, regret, params));
        }
        set => {
            let lambda0 = set.min_principal_curvature().expect("smooth set");
            let l_n = trace.min_theta_norm();
            if l_n > 0.0 {
                let value = curvature_bound(m, lambda0, l_n, trace.n).map_err(runtime)?;
                let params = [("n", n), ("M", m), ("lambda0", lambda0), ("L_n", l_n)];
                out.push(BoundReport::new(format!("{label}:curvature"), value, regret, params));
            }
            let w = set.diameter(Norm::L2);
            let inf = mixed_curvature_inf(trace, m, lambda0, w).map_err(runtime)?;
            let params = [("n", n), ("M", m), ("lambda0", lambda0), ("W", w), ("L", inf.exact_l)];
            out.push(BoundReport::new(format!("{label}:mixed_curvature_inf"), inf.exact_value, regret, params));
        }
    }
    Ok(out)
}

/// `ftl-arena run`: summary, per-series traces, bound reports and plots.
pub fn run(cfg: &ExperimentConfig, seed: u64, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let results = simulate(cfg, seed)?;
    let mut written = vec![write_table(dir, "summary.csv", &summary_table(&results))?];
    let mut reports = Vec::new();
    for r in &results {
        let trace = trace_for(cfg, r.learner, r.source, seed)?;
        let path = dir.join(format!("trace_{}.csv", file_safe(&r.label)));
        let f = fs::File::create(&path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        write_trace_csv(&trace, std::io::BufWriter::new(f)).map_err(runtime)?;
        written.push(path);
        if cfg.learners[r.learner].learner == LearnerKind::Ftl {
            let m = cfg.sources[r.source].spec.declared_bound(cfg.set.dim()).map_err(runtime)?;
            reports.extend(ftl_reports(&trace, m, &r.label)?);
        }
    }
    if !reports.is_empty() {
        written.push(write_table(dir, "bounds.csv", &reports_table(&reports))?);
    }
    if svg && cfg.outputs.svg {
        written.extend(write_svgs(cfg, dir, &results)?);
    }
    Ok(written)
}

/// Fit report: which of `a + b ln n` and `a + c √n` explains each series'
/// mean regret better.
pub fn fit_table(results: &[SeriesResult]) -> Result<Table, String> {
    let mut t = Table::new([
        "learner",
        "ln_intercept",
        "ln_slope",
        "ln_r2",
        "sqrt_intercept",
        "sqrt_slope",
        "sqrt_r2",
        "preferred",
    ]);
    for r in results {
        let fit = ftrl_stochastic_log_check(&r.rows).map_err(|e| e.to_string())?;
        t.push(vec![
            r.label.clone(),
            num(fit.ln_model.intercept),
            num(fit.ln_model.slope),
            num(fit.ln_model.r2),
            num(fit.sqrt_model.intercept),
            num(fit.sqrt_model.slope),
            num(fit.sqrt_model.r2),
            if fit.prefers_ln() { "ln" } else { "sqrt" }.to_string(),
        ]);
    }
    Ok(t)
}

/// `ftl-arena sweep`: Monte-Carlo tables per series, the growth-fit report
/// and plots. A grid too short to fit is reported on stderr; the tables
/// are still written.
pub fn sweep(cfg: &ExperimentConfig, seed: u64, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    if cfg.n_grid.is_none() {
        return Err(CliError::Config("sweep needs `n_grid`".into()));
    }
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let results = simulate(cfg, seed)?;
    let mut written = vec![write_table(dir, "summary.csv", &summary_table(&results))?];
    for r in &results {
        written.push(write_table(dir, &format!("mc_{}.csv", file_safe(&r.label)), &mc_table(&r.rows))?);
    }
    match fit_table(&results) {
        Ok(t) => written.push(write_table(dir, "fit.csv", &t)?),
        Err(msg) => eprintln!("fit report skipped: {msg}"),
    }
    if svg && cfg.outputs.svg {
        written.extend(write_svgs(cfg, dir, &results)?);
    }
    Ok(written)
}
