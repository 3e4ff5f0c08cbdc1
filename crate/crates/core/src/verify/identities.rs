//! Agreement between the regret computations and the structural facts about
//! the learners' trajectories.

use std::sync::Arc;

use rand::Rng;

use crate::adversaries::{SourceKind, SourceParams, SourceSpec};
use crate::engine::{
    regret_abel, regret_bregman, regret_definition, relative_gap, run_game, run_sequence, theta_increments,
    GameTrace,
};
use crate::error::Result;
use crate::geometry::sampling::{random_spd, unit_vector};
use crate::geometry::{ConstraintSet, Vector};
use crate::learners::{Ftl, Ftrl, LearnerKind, LearnerSpec, OnlineLearner};
use crate::rng::substream;

use super::{guard, CheckOutcome};

pub fn default_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        guard("regret_triangle", regret_triangle(20, 1000, seed)),
        guard("theta_increments", increment_corpus(500, seed)),
        guard("ftl_regret_nonnegative", ftl_regret_nonnegative(40, 500, seed)),
        guard("ftrl_closed_form", ftrl_closed_form(1000, seed)),
        guard("ftl_direction_only", ftl_direction_only(1000, seed)),
        guard("learners_in_set", learners_in_set(300, seed)),
        guard("bregman_tie_bracket", bregman_tie_bracket(50, 200, seed)),
    ]
}

/// Ball or random ellipsoid in dimension 2 or 4, chosen by `game`.
fn game_set<R: Rng + ?Sized>(game: usize, rng: &mut R) -> Result<Arc<ConstraintSet>> {
    let d = if game % 4 < 2 { 2 } else { 4 };
    Ok(Arc::new(if game % 2 == 0 {
        ConstraintSet::ball(rng.random_range(0.5..2.0), d)?
    } else {
        ConstraintSet::ellipsoid(random_spd(d, 0.2, 8.0, rng))?
    }))
}

fn stochastic(l: f64) -> SourceSpec {
    SourceSpec::stochastic(l)
}

fn play_ftl(set: &Arc<ConstraintSet>, source: &SourceSpec, n: usize, seed: u64, trial: u64) -> Result<GameTrace> {
    let mut l = Ftl::new(set.clone());
    let mut src = source.build(set.dim(), seed, trial)?;
    run_game(&mut l, &mut src, n, true)
}

/// Definition, Abel summation and the Bregman sum on seeded random FTL
/// games; returns the worst relative disagreement.
pub fn regret_triangle(games: usize, n: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1d01);
    let mut worst: f64 = 0.0;
    let mut ties = 0usize;
    for g in 0..games {
        let set = game_set(g, &mut rng)?;
        let source = stochastic([0.05, 0.1, 0.3][g % 3]);
        let trace = play_ftl(&set, &source, n, seed, g as u64)?;
        let def = regret_definition(&trace);
        let abel = regret_abel(&trace)?;
        let breg = regret_bregman(&trace)?;
        ties += breg.tied_rounds;
        for other in [abel, breg.lower, breg.upper] {
            worst = worst.max(relative_gap(def, other));
        }
    }
    Ok(CheckOutcome::new(
        "regret_triangle",
        worst <= 1e-8 && ties == 0,
        format!("{games} games of {n} rounds: worst relative gap {worst:.2e}, tied rounds {ties}"),
    ))
}

/// The loss sources exercised by the corpus checks, with the dimension
/// they need.
fn corpus_sources() -> Vec<(SourceSpec, usize)> {
    let with = |kind, params| SourceSpec::new(kind, params);
    vec![
        (stochastic(0.1), 4),
        (stochastic(0.0), 2),
        (with(SourceKind::HalfAdversarial, SourceParams { l: Some(0.2), ..Default::default() }), 4),
        (SourceSpec::worst_case(), 2),
        (SourceSpec::worst_case(), 4),
        (with(SourceKind::BetaBernoulli, SourceParams { l: Some(0.5), k: Some(1.0), ..Default::default() }), 2),
    ]
}

fn corpus_sets(d: usize, rng: &mut impl Rng) -> Result<Vec<Arc<ConstraintSet>>> {
    let mut sets = vec![
        Arc::new(ConstraintSet::ball(1.0, d)?),
        Arc::new(ConstraintSet::ellipsoid(random_spd(d, 0.3, 6.0, rng))?),
    ];
    if d == 4 {
        sets.push(Arc::new(ConstraintSet::reference_ellipsoid()));
    }
    Ok(sets)
}

fn learner_specs(set: &ConstraintSet) -> Vec<LearnerSpec> {
    let mut kinds = vec![LearnerKind::Ftl];
    if !matches!(set, ConstraintSet::Polytope(_)) {
        kinds.extend([LearnerKind::Ftrl, LearnerKind::Abprod]);
    }
    if matches!(set, ConstraintSet::Ball(_)) {
        kinds.push(LearnerKind::Ftsl);
    }
    kinds.into_iter().map(LearnerSpec::new).collect()
}

/// Every (set, source, learner) combination of the corpus, played once.
fn corpus_traces(n: usize, seed: u64) -> Result<Vec<(GameTrace, f64)>> {
    let mut rng = substream(seed, 0x1d02);
    let mut out = Vec::new();
    for (i, (source, d)) in corpus_sources().into_iter().enumerate() {
        for set in corpus_sets(d, &mut rng)? {
            let m = source.declared_bound(d)?;
            for spec in learner_specs(&set) {
                let mut l = spec.build(&set, Some(n), m)?;
                let mut src = source.build(d, seed, i as u64)?;
                out.push((run_game(l.as_mut(), &mut src, n, true)?, m));
            }
        }
    }
    Ok(out)
}

/// `‖Θ_t − Θ_{t−1}‖₂ ≤ 2M/t` on every trace of the corpus, with `M` the
/// source's declared bound.
pub fn increment_corpus(n: usize, seed: u64) -> Result<CheckOutcome> {
    let traces = corpus_traces(n, seed)?;
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0usize;
    for (trace, m) in &traces {
        for (_, inc, bound) in theta_increments(trace, *m) {
            worst_ratio = worst_ratio.max(inc / bound);
            if inc > bound + 1e-12 {
                violations += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        "theta_increments",
        violations == 0,
        format!("{} traces: {violations} violations, largest increment/bound {worst_ratio:.6}", traces.len()),
    ))
}

/// FTL never does worse than the best fixed point in hindsight.
pub fn ftl_regret_nonnegative(games: usize, n: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1d03);
    let mut worst = f64::INFINITY;
    for g in 0..games {
        let set = game_set(g, &mut rng)?;
        let sources = corpus_sources();
        let (source, _) = sources
            .iter()
            .filter(|(_, d)| *d == set.dim())
            .nth(g % 3)
            .cloned()
            .expect("each dimension has three sources");
        let trace = play_ftl(&set, &source, n, seed, g as u64)?;
        worst = worst.min(regret_definition(&trace));
    }
    Ok(CheckOutcome::new(
        "ftl_regret_nonnegative",
        worst >= -1e-9,
        format!("{games} games of {n} rounds: smallest regret {worst:.3e}"),
    ))
}

/// On the unit ball FTRL has the closed form `−F/max(√(t−1), ‖F‖)`.
pub fn ftrl_closed_form(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1d04);
    let set = Arc::new(ConstraintSet::ball(1.0, 3)?);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let t = rng.random_range(2..200usize);
        let big_f = unit_vector(3, &mut rng) * rng.random_range(0.0..2.0 * (t as f64).sqrt());
        let mut l = Ftrl::new(set.clone())?;
        super::drive_to(&mut l, &big_f, t)?;
        let f = l.state().cumulative().clone();
        let closed = -&f / ((t - 1) as f64).sqrt().max(f.norm());
        worst = worst.max((l.predict()? - closed).amax());
    }
    Ok(CheckOutcome::new(
        "ftrl_closed_form",
        worst <= 1e-10,
        format!("{instances} random (F, t): worst deviation {worst:.2e}"),
    ))
}

/// FTL on a ball sees `F` only through its direction.
pub fn ftl_direction_only(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1d05);
    let set = Arc::new(ConstraintSet::ball(1.3, 4)?);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let f = unit_vector(4, &mut rng) * rng.random_range(0.01..10.0);
        let c: f64 = rng.random_range(0.01..100.0);
        let play = |f: Vector| -> Result<Vector> {
            let mut l = Ftl::new(set.clone());
            let trace = run_sequence(&mut l, &[f], false)?;
            Ok(trace.w_next_final.expect("FTL records the next leader"))
        };
        worst = worst.max((play(f.clone())? - play(f * c)?).amax());
    }
    Ok(CheckOutcome::new(
        "ftl_direction_only",
        worst <= 1e-15,
        format!("{instances} random (F, c): worst deviation {worst:.2e}"),
    ))
}

/// Every learner on every corpus set and source, with membership checked
/// each round, plus FTL on the simplex.
pub fn learners_in_set(n: usize, seed: u64) -> Result<CheckOutcome> {
    let traces = corpus_traces(n, seed)?;
    let simplex = Arc::new(ConstraintSet::simplex(3)?);
    let uniform = SourceSpec::new(
        SourceKind::UniformBox,
        SourceParams { mean: Some(vec![0.0, 0.5, 0.5]), half_width: Some(0.5), ..Default::default() },
    );
    let mut l = Ftl::new(simplex.clone());
    let mut src = uniform.build(3, seed, 0)?;
    run_game(&mut l, &mut src, n, true)?;
    Ok(CheckOutcome::new(
        "learners_in_set",
        true,
        format!("{} games of {n} rounds with every prediction inside the set", traces.len() + 1),
    ))
}

/// On polytopes with integer losses the leader is often tied; the Bregman
/// sum then brackets the regret.
pub fn bregman_tie_bracket(games: usize, n: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = substream(seed, 0x1d06);
    let set = Arc::new(ConstraintSet::simplex(3)?);
    let mut ties = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..games {
        let losses: Vec<Vector> =
            (0..n).map(|_| Vector::from_fn(3, |_, _| rng.random_range(0..2u8) as f64)).collect();
        let mut l = Ftl::new(set.clone());
        let trace = run_sequence(&mut l, &losses, true)?;
        let def = regret_definition(&trace);
        let b = regret_bregman(&trace)?;
        ties += b.tied_rounds;
        worst = worst.max(b.lower - def).max(def - b.upper);
    }
    Ok(CheckOutcome::new(
        "bregman_tie_bracket",
        worst <= 1e-9 && ties > 0,
        format!("{games} games, {ties} tied rounds: largest bracket excess {worst:.2e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        for o in default_checks(5) {
            assert!(o.passed, "{o}");
        }
    }
}
