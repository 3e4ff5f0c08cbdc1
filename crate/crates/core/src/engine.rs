//! The learner-versus-source game and every regret computation derived from
//! its trace.
//!
//! Sign conventions: `F_t = Σ_{i≤t} f_i`, `Θ_t = −F_t/t`, `Φ` is the support
//! function of the set, so `min_w ⟨w, F_n⟩ = −Φ(−F_n)`.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::adversaries::LossSource;
use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, Subdifferential, Vector, MEMBERSHIP_TOL};
use crate::learners::OnlineLearner;
use crate::table::{num, Table};

/// Threshold on `‖w_{t+1} − w_t‖₂` above which the leader counts as switched.
pub const SWITCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub t: usize,
    pub w: Vector,
    pub f: Vector,
    pub loss: f64,
    pub theta: Vector,
}

#[derive(Debug, Clone)]
pub struct GameTrace {
    pub n: usize,
    pub learner: String,
    pub rounds: Vec<Round>,
    /// `w_{n+1}`, present for follow-the-leader traces.
    pub w_next_final: Option<Vector>,
    pub set: Arc<ConstraintSet>,
}

/// Plays `n` rounds. With `diagnostics` every prediction is checked for
/// membership and the game aborts on the first violation.
pub fn run_game(learner: &mut dyn OnlineLearner, source: &mut LossSource, n: usize, diagnostics: bool) -> Result<GameTrace> {
    play(learner, n, diagnostics, |_| source.next_loss())
}

/// Plays a fixed loss sequence.
pub fn run_sequence(learner: &mut dyn OnlineLearner, losses: &[Vector], diagnostics: bool) -> Result<GameTrace> {
    play(learner, losses.len(), diagnostics, |t| losses[t - 1].clone())
}

fn play(
    learner: &mut dyn OnlineLearner,
    n: usize,
    diagnostics: bool,
    mut next: impl FnMut(usize) -> Vector,
) -> Result<GameTrace> {
    let set = learner.state().set().clone();
    let d = set.dim();
    let mut rounds = Vec::with_capacity(n);
    let mut big_f = Vector::zeros(d);
    for t in 1..=n {
        let w = learner.predict()?;
        if diagnostics {
            let violation = set.membership_violation(&w);
            if violation > MEMBERSHIP_TOL {
                return Err(Error::OutsideSet { t, violation });
            }
        }
        let f = next(t);
        if f.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: f.len() });
        }
        learner.observe(&f)?;
        big_f += &f;
        let theta = -&big_f / t as f64;
        rounds.push(Round { t, loss: f.dot(&w), w, f, theta });
    }
    let w_next_final = if learner.follows_leader() { Some(learner.predict()?) } else { None };
    Ok(GameTrace { n, learner: learner.name(), rounds, w_next_final, set })
}

impl GameTrace {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// `F_n`, accumulated in round order.
    pub fn cumulative_loss_vector(&self) -> Vector {
        self.rounds.iter().fold(Vector::zeros(self.dim()), |acc, r| acc + &r.f)
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.rounds.iter().map(|r| r.loss).sum()
    }

    /// `w_1, …, w_n, w_{n+1}`; errors when `w_{n+1}` was not recorded.
    fn leader_path(&self) -> Result<Vec<&Vector>> {
        let last = self.w_next_final.as_ref().ok_or(Error::NotLeaderTrace)?;
        Ok(self.rounds.iter().map(|r| &r.w).chain(std::iter::once(last)).collect())
    }

    /// `Θ_0 = 0, Θ_1, …, Θ_n`.
    fn thetas(&self) -> Vec<Vector> {
        std::iter::once(Vector::zeros(self.dim())).chain(self.rounds.iter().map(|r| r.theta.clone())).collect()
    }

    /// `min_t ‖Θ_t‖₂`.
    pub fn min_theta_norm(&self) -> f64 {
        self.rounds.iter().map(|r| r.theta.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation between stored and recomputed `Θ_t`, and between
    /// stored losses and `⟨f_t, w_t⟩`.
    pub fn consistency_error(&self) -> f64 {
        let mut big_f = Vector::zeros(self.dim());
        let mut worst: f64 = 0.0;
        for r in &self.rounds {
            big_f += &r.f;
            worst = worst.max((-&big_f / r.t as f64 - &r.theta).amax());
            worst = worst.max((r.f.dot(&r.w) - r.loss).abs());
        }
        worst
    }
}

/// `Σ ⟨f_t, w_t⟩ + Φ(−F_n)`.
pub fn regret_definition(trace: &GameTrace) -> f64 {
    let f_n = trace.cumulative_loss_vector();
    trace.cumulative_loss() + support_value(&trace.set, &-f_n)
}

/// Regret of the first `t` rounds, for every `t = 1..n`.
pub fn prefix_regrets(trace: &GameTrace) -> Vec<f64> {
    let mut big_f = Vector::zeros(trace.dim());
    let mut cum = 0.0;
    trace
        .rounds
        .iter()
        .map(|r| {
            big_f += &r.f;
            cum += r.loss;
            cum + support_value(&trace.set, &-&big_f)
        })
        .collect()
}

fn support_value(set: &ConstraintSet, theta: &Vector) -> f64 {
    set.support(theta).expect("trace vectors share the set's dimension and are finite").value
}

/// `Σ_{t=1}^n t·⟨w_{t+1} − w_t, Θ_t⟩`; follow-the-leader traces only.
pub fn regret_abel(trace: &GameTrace) -> Result<f64> {
    let path = trace.leader_path()?;
    Ok(trace
        .rounds
        .iter()
        .enumerate()
        .map(|(i, r)| r.t as f64 * (path[i + 1] - path[i]).dot(&r.theta))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BregmanRegret {
    pub lower: f64,
    pub upper: f64,
    /// Rounds where `Φ` was not differentiable at `Θ_{t−1}`.
    pub tied_rounds: usize,
}

/// `Σ_{t=1}^n t·D_Φ(Θ_t, Θ_{t−1})` with `D_Φ(θ', θ) = Φ(θ') − ⟨v, θ'⟩` for
/// `v ∈ ∂Φ(θ)`, and `∇Φ(Θ_0) := w_1`. Where `∂Φ(Θ_{t−1})` is not a
/// singleton the extreme choices of `v` give the lower and upper sums.
pub fn regret_bregman(trace: &GameTrace) -> Result<BregmanRegret> {
    let first = &trace.rounds.first().ok_or_else(|| Error::Degenerate("empty trace".into()))?.w;
    let thetas = trace.thetas();
    let set = &trace.set;
    let (mut lower, mut upper, mut tied) = (0.0, 0.0, 0usize);
    for t in 1..thetas.len() {
        let cur = &thetas[t];
        let phi = support_value(set, cur);
        let (lo, hi) = if t == 1 {
            let d = phi - first.dot(cur);
            (d, d)
        } else {
            match set.subdifferential_extent(&thetas[t - 1])? {
                Subdifferential::Points(vs) => {
                    if vs.len() > 1 {
                        tied += 1;
                    }
                    let dots = vs.iter().map(|v| v.dot(cur));
                    let (mn, mx) = dots.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                    (phi - mx, phi - mn)
                }
                Subdifferential::WholeSet => {
                    tied += 1;
                    // max over the set of ⟨v, θ'⟩ is Φ(θ'), min is −Φ(−θ')
                    (0.0, phi + support_value(set, &-cur))
                }
            }
        };
        lower += t as f64 * lo;
        upper += t as f64 * hi;
    }
    Ok(BregmanRegret { lower, upper, tied_rounds: tied })
}

/// `|a − b| / max(1, |a|, |b|)`: relative agreement with an absolute floor
/// for regrets near zero.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Number of rounds `t ∈ 1..=n` with `‖w_{t+1} − w_t‖₂ > 1e-9`.
pub fn switch_count(trace: &GameTrace) -> Result<usize> {
    Ok(switch_indicators(trace)?.into_iter().filter(|&s| s).count())
}

/// `𝕀(w_{t+1} ≠ w_t)` for `t = 1..=n`.
pub fn switch_indicators(trace: &GameTrace) -> Result<Vec<bool>> {
    let path = trace.leader_path()?;
    Ok(path.windows(2).map(|p| (p[1] - p[0]).norm() > SWITCH_TOL).collect())
}

/// `‖Θ_t − Θ_{t−1}‖₂` for `t = 2..=n`, paired with the allowance `2M/t`.
pub fn theta_increments(trace: &GameTrace, m: f64) -> Vec<(usize, f64, f64)> {
    trace
        .rounds
        .windows(2)
        .map(|p| {
            let t = p[1].t;
            (t, (&p[1].theta - &p[0].theta).norm(), 2.0 * m / t as f64)
        })
        .collect()
}

/// Whether `‖Θ_t − Θ_{t−1}‖₂ ≤ 2M/t + 1e-12` for every `t ≥ 2`.
pub fn theta_increment_check(trace: &GameTrace, m: f64) -> bool {
    theta_increments(trace, m).into_iter().all(|(_, inc, bound)| inc <= bound + 1e-12)
}

/// Writes the trace as CSV: `t, w_1..w_d, f_1..f_d, loss, cum_loss,
/// theta_norm, regret_to_date`.
pub fn write_trace_csv<W: Write>(trace: &GameTrace, out: W) -> Result<()> {
    trace_table(trace).write(out)
}

pub fn trace_table(trace: &GameTrace) -> Table {
    let d = trace.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("w_{i}")));
    header.extend((1..=d).map(|i| format!("f_{i}")));
    header.extend(["loss", "cum_loss", "theta_norm", "regret_to_date"].map(String::from));
    let mut table = Table::new(header);
    let regrets = prefix_regrets(trace);
    let mut cum = 0.0;
    for (r, regret) in trace.rounds.iter().zip(regrets) {
        cum += r.loss;
        let mut row = vec![r.t.to_string()];
        row.extend(r.w.iter().map(|&x| num(x)));
        row.extend(r.f.iter().map(|&x| num(x)));
        row.extend([num(r.loss), num(cum), num(r.theta.norm()), num(regret)]);
        table.push(row);
    }
    table
}
