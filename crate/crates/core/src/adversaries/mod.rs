//! Loss-sequence generators.
//!
//! Every source is oblivious: its sequence depends only on its parameters and
//! its random stream, never on the learner's plays. Running several learners
//! against sources built from the same `(seed, trial)` pair therefore feeds
//! them identical losses.

mod lower;

use rand::Rng;
use rand_distr::{Bernoulli, Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sampling, unit, Vector};
use crate::rng::{substream, ArenaRng};

pub use lower::{
    bayes_error_analytic, bayes_error_monte_carlo, bayes_w, lower_bound_ellipse, p2p1_gap, p2p1_lower,
    phat_concentration_check, posterior_mean, ConcentrationCheck, MonteCarloEstimate, PosteriorState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Stochastic,
    HalfAdversarial,
    WorstCase,
    BetaBernoulli,
    UniformBox,
    Constant,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stochastic => "stochastic",
            Self::HalfAdversarial => "half_adversarial",
            Self::WorstCase => "worst_case",
            Self::BetaBernoulli => "beta_bernoulli",
            Self::UniformBox => "uniform_box",
            Self::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClipMode {
    /// `f̂/‖f̂‖₂` every round.
    #[default]
    NormalizeAlways,
    /// `f̂` unchanged inside the unit ball, normalised outside.
    NormalizeIfOutside,
}

/// `{"adversary": "...", "params": {...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub adversary: SourceKind,
    #[serde(default)]
    pub params: SourceParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    /// Mean offset along `e₁` (stochastic, half_adversarial) or the fixed
    /// second coordinate magnitude (beta_bernoulli).
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Forces the Bernoulli parameter instead of drawing it from Beta(K,K).
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Overrides the experiment's master seed for this source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_mode: Option<ClipMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Optional; when present it must agree with the constraint set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
}

impl SourceParams {
    fn present(&self) -> Vec<&'static str> {
        [
            ("L", self.l.is_some()),
            ("K", self.k.is_some()),
            ("P", self.p.is_some()),
            ("seed", self.seed.is_some()),
            ("clip_mode", self.clip_mode.is_some()),
            ("sigma", self.sigma.is_some()),
            ("dim", self.dim.is_some()),
            ("mean", self.mean.is_some()),
            ("half_width", self.half_width.is_some()),
            ("f", self.f.is_some()),
        ]
        .into_iter()
        .filter_map(|(k, on)| on.then_some(k))
        .collect()
    }
}

impl SourceSpec {
    pub fn new(adversary: SourceKind, params: SourceParams) -> Self {
        Self { adversary, params }
    }

    pub fn stochastic(l: f64) -> Self {
        Self::new(SourceKind::Stochastic, SourceParams { l: Some(l), ..Default::default() })
    }

    pub fn worst_case() -> Self {
        Self::new(SourceKind::WorstCase, SourceParams::default())
    }

    /// Checks parameter applicability and ranges for a set of dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let p = &self.params;
        let allowed: &[&str] = match self.adversary {
            SourceKind::Stochastic => &["L", "seed", "clip_mode", "sigma", "dim"],
            SourceKind::HalfAdversarial => &["L", "seed", "dim"],
            SourceKind::WorstCase => &["dim"],
            SourceKind::BetaBernoulli => &["K", "L", "P", "seed", "dim"],
            SourceKind::UniformBox => &["mean", "half_width", "seed", "dim"],
            SourceKind::Constant => &["f", "dim"],
        };
        if let Some(bad) = p.present().into_iter().find(|k| !allowed.contains(k)) {
            return Err(Error::Precondition(format!(
                "parameter `params.{bad}` does not apply to adversary `{}`",
                self.adversary.as_str()
            )));
        }
        if let Some(d) = p.dim {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: d });
            }
        }
        let l = p.l.unwrap_or(0.0);
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::Precondition(msg.to_string())) };
        match self.adversary {
            SourceKind::Stochastic => {
                need(l.is_finite() && l >= 0.0, "stochastic: L must be a finite number ≥ 0")?;
                need(p.sigma.is_none_or(|s| s.is_finite() && s > 0.0), "stochastic: sigma must be positive")?;
            }
            SourceKind::HalfAdversarial => {
                need((0.0..=1.0).contains(&l), "half_adversarial: L must lie in [0, 1]")?;
                need(dim >= 3, "half_adversarial: needs dimension ≥ 3")?;
            }
            SourceKind::WorstCase => {}
            SourceKind::BetaBernoulli => {
                need(dim == 2, "beta_bernoulli: the construction is two-dimensional")?;
                need(p.k.is_some_and(|k| k.is_finite() && k > 0.0), "beta_bernoulli: K must be given and positive")?;
                need(p.l.is_some_and(|l| l > 0.0 && l < 1.0), "beta_bernoulli: L must be given and lie in (0, 1)")?;
                need(p.p.is_none_or(|q| (0.0..=1.0).contains(&q)), "beta_bernoulli: forced P must lie in [0, 1]")?;
            }
            SourceKind::UniformBox => {
                need(p.mean.as_ref().is_some_and(|m| m.len() == dim), "uniform_box: `mean` must have the set's dimension")?;
                need(p.half_width.is_some_and(|a| a.is_finite() && a >= 0.0), "uniform_box: half_width must be ≥ 0")?;
            }
            SourceKind::Constant => {
                need(p.f.as_ref().is_some_and(|f| f.len() == dim), "constant: `f` must have the set's dimension")?;
            }
        }
        Ok(())
    }

    /// Builds the source for trial `trial` of an experiment seeded with
    /// `master_seed` (or with `params.seed` when set).
    pub fn build(&self, dim: usize, master_seed: u64, trial: u64) -> Result<LossSource> {
        self.validate(dim)?;
        let mut rng = substream(self.params.seed.unwrap_or(master_seed), trial);
        let p = &self.params;
        let l = p.l.unwrap_or(0.0);
        let kind = match self.adversary {
            SourceKind::Stochastic => Kind::Stochastic {
                l,
                clip: p.clip_mode.unwrap_or_default(),
                sigma: p.sigma.unwrap_or(1.0),
            },
            SourceKind::HalfAdversarial => Kind::HalfAdversarial { l, running: Vector::zeros(dim) },
            SourceKind::WorstCase => Kind::WorstCase,
            SourceKind::BetaBernoulli => {
                let k = p.k.expect("validated");
                let prob = match p.p {
                    Some(q) => q,
                    None => Beta::new(k, k).map_err(|e| Error::Precondition(e.to_string()))?.sample(&mut rng),
                };
                Kind::BetaBernoulli {
                    k,
                    l,
                    p: prob,
                    coin: Bernoulli::new(prob).map_err(|e| Error::Precondition(e.to_string()))?,
                }
            }
            SourceKind::UniformBox => Kind::UniformBox {
                mean: Vector::from_column_slice(p.mean.as_ref().expect("validated")),
                half_width: p.half_width.expect("validated"),
            },
            SourceKind::Constant => Kind::Constant(Vector::from_column_slice(p.f.as_ref().expect("validated"))),
        };
        Ok(LossSource { kind, dim, t: 0, rng })
    }

    /// The declared bound `M ≥ ‖f_t‖₂` for this source on dimension `dim`.
    pub fn declared_bound(&self, dim: usize) -> Result<f64> {
        Ok(self.build(dim, 0, 0)?.declared_bound())
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Stochastic { l: f64, clip: ClipMode, sigma: f64 },
    HalfAdversarial { l: f64, running: Vector },
    WorstCase,
    BetaBernoulli { k: f64, l: f64, p: f64, coin: Bernoulli },
    UniformBox { mean: Vector, half_width: f64 },
    Constant(Vector),
}

/// A seeded, single-owner generator of loss vectors.
#[derive(Debug, Clone)]
pub struct LossSource {
    kind: Kind,
    dim: usize,
    t: usize,
    rng: ArenaRng,
}

impl LossSource {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of losses emitted so far.
    pub fn emitted(&self) -> usize {
        self.t
    }

    /// The Bernoulli parameter drawn at construction (beta_bernoulli only).
    pub fn bernoulli_p(&self) -> Option<f64> {
        match &self.kind {
            Kind::BetaBernoulli { p, .. } => Some(*p),
            _ => None,
        }
    }

    /// Prior concentration `K` (beta_bernoulli only).
    pub fn prior_k(&self) -> Option<f64> {
        match &self.kind {
            Kind::BetaBernoulli { k, .. } => Some(*k),
            _ => None,
        }
    }

    /// Bound on `‖f_t‖₂` that holds for every emitted vector.
    pub fn declared_bound(&self) -> f64 {
        match &self.kind {
            Kind::Stochastic { l, .. } => 1.0 + l,
            Kind::HalfAdversarial { .. } | Kind::WorstCase => 1.0,
            Kind::BetaBernoulli { l, .. } => (1.0 + l * l).sqrt(),
            Kind::UniformBox { mean, half_width } => mean.map(|m| m.abs() + half_width).norm(),
            Kind::Constant(f) => f.norm(),
        }
    }

    /// Bound on `‖f_t‖_∞`.
    pub fn declared_sup_bound(&self) -> f64 {
        match &self.kind {
            Kind::UniformBox { mean, half_width } => mean.amax() + half_width,
            Kind::Constant(f) => f.amax(),
            Kind::WorstCase => 1.0,
            _ => self.declared_bound(),
        }
    }

    /// Expected loss vector, when it is fixed in advance.
    pub fn mean(&self) -> Option<Vector> {
        match &self.kind {
            Kind::Stochastic { l, .. } => Some(unit(self.dim, 0) * *l),
            Kind::BetaBernoulli { l, p, .. } => Some(Vector::from_column_slice(&[2.0 * p - 1.0, -l])),
            Kind::UniformBox { mean, .. } => Some(mean.clone()),
            Kind::Constant(f) => Some(f.clone()),
            Kind::HalfAdversarial { .. } | Kind::WorstCase => None,
        }
    }

    pub fn next_loss(&mut self) -> Vector {
        self.t += 1;
        let t = self.t;
        let d = self.dim;
        let rng = &mut self.rng;
        match &mut self.kind {
            Kind::Stochastic { l, clip, sigma } => {
                let mut g = nonzero_gaussian(d, *sigma, rng);
                let n = g.norm();
                if *clip == ClipMode::NormalizeAlways || n > 1.0 {
                    g /= n;
                }
                g[0] += *l;
                g
            }
            Kind::HalfAdversarial { l, running } => {
                let dir = loop {
                    let mut g = sampling::gaussian(d, rng);
                    g[0] = 0.0;
                    let s2 = running.norm_squared();
                    if s2 > 0.0 {
                        let c = g.dot(running) / s2;
                        g.axpy(-c, running, 1.0);
                        // one re-orthogonalisation pass keeps |⟨f̂_t, Σf̂⟩| at rounding level
                        let c = g.dot(running) / s2;
                        g.axpy(-c, running, 1.0);
                    }
                    let n = g.norm();
                    if n > 1e-12 {
                        break g / n;
                    }
                };
                *running += &dir;
                let mut f = dir * (1.0 - *l * *l).sqrt();
                f[0] = *l;
                f
            }
            Kind::WorstCase => {
                let mut f = Vector::zeros(d);
                f[0] = if t == 1 { 0.9 } else { 2.0 * (t % 2) as f64 - 1.0 };
                f
            }
            Kind::BetaBernoulli { l, coin, .. } => {
                let x = coin.sample(rng);
                Vector::from_column_slice(&[if x { 1.0 } else { -1.0 }, -*l])
            }
            Kind::UniformBox { mean, half_width } => {
                let a = *half_width;
                Vector::from_fn(d, |i, _| mean[i] + a * (2.0 * rng.random::<f64>() - 1.0))
            }
            Kind::Constant(f) => f.clone(),
        }
    }

    /// The first `n` losses.
    pub fn take(&mut self, n: usize) -> Vec<Vector> {
        (0..n).map(|_| self.next_loss()).collect()
    }
}

fn nonzero_gaussian<R: Rng + ?Sized>(d: usize, sigma: f64, rng: &mut R) -> Vector {
    loop {
        let g = Vector::from_fn(d, |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        });
        if g.norm() > 0.0 {
            return g;
        }
    }
}
