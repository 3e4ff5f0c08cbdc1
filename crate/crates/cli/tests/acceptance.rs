//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion does. Every tolerance and sample size is
//! pinned here rather than taken from the library defaults.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ftl_arena::adversaries::SourceSpec;
use ftl_arena::bounds::{ftrl_stochastic_log_check, monte_carlo_regret};
use ftl_arena::learners::{LearnerKind, LearnerSpec};
use ftl_arena::verify::{bounds, geometry, identities, lemmas, CheckOutcome};
use ftl_arena::ConstraintSet;

const SEED: u64 = 2718;

/// Criterion 1 wall-clock budget for 20 games of 1000 rounds.
const TRIANGLE_BUDGET: Duration = Duration::from_secs(10);
/// Criterion 3 wall-clock budget for 100 seeds at n = 2500.
const CURVATURE_BUDGET: Duration = Duration::from_secs(120);
/// Criterion 4 horizon grid and trial count.
const FIG2_GRID: [usize; 6] = [78, 156, 312, 625, 1250, 2500];
const FIG2_TRIALS: usize = 100;

struct Line {
    id: u8,
    passed: bool,
    detail: String,
}

fn from_checks(id: u8, checks: Vec<ftl_arena::Result<CheckOutcome>>) -> Line {
    let mut passed = true;
    let mut parts = Vec::new();
    for c in checks {
        match c {
            Ok(o) => {
                passed &= o.passed;
                parts.push(format!("{} [{}]", o.name, o.detail));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("error: {e}"));
            }
        }
    }
    Line { id, passed, detail: parts.join("; ") }
}

fn reference_set() -> Arc<ConstraintSet> {
    Arc::new(ConstraintSet::reference_ellipsoid())
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let r = identities::regret_triangle(20, 1000, SEED);
    let elapsed = start.elapsed();
    let mut line = from_checks(1, vec![r]);
    line.passed &= elapsed < TRIANGLE_BUDGET;
    line.detail = format!("{} ({:.2}s)", line.detail, elapsed.as_secs_f64());
    line
}

fn criterion_2() -> Line {
    from_checks(2, vec![identities::increment_corpus(1000, SEED)])
}

fn criterion_3() -> Line {
    let start = Instant::now();
    let r = bounds::curvature_dominance(100, 2500, 0.1, SEED);
    let elapsed = start.elapsed();
    let mut line = from_checks(3, vec![r]);
    line.passed &= elapsed < CURVATURE_BUDGET;
    line.detail = format!("{} ({:.2}s)", line.detail, elapsed.as_secs_f64());
    line
}

fn criterion_4() -> Line {
    let set = reference_set();
    let source = SourceSpec::stochastic(0.1);
    let run = |k| monte_carlo_regret(&LearnerSpec::new(k), &source, &set, &FIG2_GRID, FIG2_TRIALS, SEED);
    match (run(LearnerKind::Ftl), run(LearnerKind::Ftrl)) {
        (Ok(ftl), Ok(ftrl)) => {
            let (a, b) = (ftl.last().unwrap().mean, ftrl.last().unwrap().mean);
            match ftrl_stochastic_log_check(&ftl) {
                Ok(fit) => Line {
                    id: 4,
                    passed: a < b && fit.prefers_ln(),
                    detail: format!(
                        "mean regret at 2500: ftl {a:.3} < ftrl {b:.3}; ftl R² ln {:.4} vs sqrt {:.4}",
                        fit.ln_model.r2, fit.sqrt_model.r2
                    ),
                },
                Err(e) => Line { id: 4, passed: false, detail: e.to_string() },
            }
        }
        (Err(e), _) | (_, Err(e)) => Line { id: 4, passed: false, detail: e.to_string() },
    }
}

fn criterion_5() -> Line {
    from_checks(5, vec![bounds::worst_case_linear(1250, 2500, SEED), bounds::abprod_allowance(2500, SEED)])
}

fn criterion_6() -> Line {
    from_checks(6, vec![bounds::stochastic_polytope(100, 1000, 2000, SEED)])
}

fn criterion_7() -> Line {
    from_checks(7, vec![lemmas::ftsl_steps(10_000, SEED)])
}

fn criterion_8() -> Line {
    from_checks(
        8,
        vec![
            lemmas::bayes_error_grid(100_000, SEED),
            lemmas::concentration_grid(20_000, SEED),
            lemmas::p2p1_sweep(100_000, SEED),
            bounds::lower_bound_slope(400, SEED),
        ],
    )
}

fn criterion_9() -> Line {
    let set = reference_set();
    let ConstraintSet::Ellipsoid(e) = set.as_ref() else { unreachable!() };
    let q = e.q().clone();
    let ball = ConstraintSet::ball(1.0, 4).unwrap();
    let lambda0 = set.min_principal_curvature().unwrap();
    from_checks(
        9,
        vec![
            // 8 axis endpoints + 92 random boundary points = 100 evaluations
            geometry::weingarten_vs_lambda0(&q, 92, SEED),
            geometry::strong_convexity_holds(&ball, 1.0, 100_000, SEED),
            geometry::strong_convexity_holds(&set, lambda0, 100_000, SEED),
            geometry::strong_convexity_violation(&q, 1.05, 100_000, SEED),
        ],
    )
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

fn criterion_10() -> Line {
    let tmp = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = tmp.path().join("small.json");
    fs::write(
        &cfg,
        r#"{
            "name": "determinism",
            "set": {"ball": {"radius": 1, "dim": 4}},
            "learners": [{"learner": "ftl"}, {"learner": "ftsl"}, {"learner": "ftrl"}, {"learner": "abprod"}],
            "adversary": {"adversary": "stochastic", "params": {"L": [0, 0.1], "sigma": 0.25, "clip_mode": "normalize-if-outside"}},
            "n_grid": [50, 100, 200, 400],
            "trials": 16,
            "master_seed": 11
        }"#,
    )
    .unwrap();
    let jobs: Vec<(String, Vec<String>)> = vec![
        ("run".into(), vec!["run".into(), cfg.display().to_string()]),
        ("sweep".into(), vec!["sweep".into(), cfg.display().to_string()]),
        ("fig4".into(), vec!["run".into(), configs.join("fig4_worstcase.json").display().to_string()]),
        ("verify".into(), vec!["verify".into(), "identities".into()]),
    ];
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for (name, args) in &jobs {
        // the second run is single-threaded, so equality also covers the
        // parallel trial schedule
        for (k, threads) in [("a", "4"), ("b", "1")] {
            let out = tmp.path().join(format!("{name}_{k}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ftl-arena"))
                .args(args)
                .args(["--out", out.to_str().unwrap(), "--no-svg"])
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .unwrap()
                .status;
            if !status.success() {
                return Line { id: 10, passed: false, detail: format!("{name} run {k} exited with {status}") };
            }
        }
        let (a, b) = (tmp.path().join(format!("{name}_a")), tmp.path().join(format!("{name}_b")));
        for f in csv_files(&a) {
            compared += 1;
            let other = b.join(f.file_name().unwrap());
            if fs::read(&f).unwrap() != fs::read(&other).unwrap_or_default() {
                mismatched.push(f.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
        if csv_files(&a).len() != csv_files(&b).len() {
            mismatched.push(format!("{name}: file sets differ"));
        }
    }
    Line {
        id: 10,
        passed: mismatched.is_empty() && compared > 0,
        detail: format!("{compared} CSV files compared across runs, mismatches: [{}]", mismatched.join(", ")),
    }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Line; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let lines: Vec<Line> = criteria.iter().map(|c| c()).collect();
    for l in &lines {
        println!("criterion {:>2}: {}  {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
