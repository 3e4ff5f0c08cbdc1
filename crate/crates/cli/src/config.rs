//! Experiment configuration files.
//!
//! Parsing is strict: an unknown or misspelled key anywhere fails before
//! any computation, with the path of the offending key in the message.
//! `adversary.params.L` may be a list, which expands into one series per
//! value.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ftl_arena::adversaries::SourceSpec;
use ftl_arena::learners::LearnerSpec;
use ftl_arena::ConstraintSet;
use ftl_arena::Vector;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Ball { radius: f64, dim: usize },
    /// Row-major `Q` of `{w : wᵀQw ≤ 1}`.
    Ellipsoid { q: Vec<Vec<f64>> },
    Polytope { vertices: Vec<Vec<f64>> },
    Simplex { dim: usize },
}

impl SetSpec {
    pub fn build(&self) -> ftl_arena::Result<ConstraintSet> {
        match self {
            Self::Ball { radius, dim } => ConstraintSet::ball(*radius, *dim),
            Self::Ellipsoid { q } => ftl_arena::geometry::Ellipsoid::from_rows(q).map(ConstraintSet::Ellipsoid),
            Self::Polytope { vertices } => {
                ConstraintSet::polytope(vertices.iter().map(|v| Vector::from_column_slice(v)).collect())
            }
            Self::Simplex { dim } => ConstraintSet::simplex(*dim),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// regret against `ln n`
    Loglin,
    /// regret against `√n`
    Sqrtlin,
    /// regret against `n`
    Linlin,
}

impl Axis {
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::Loglin => "regret_vs_ln_n",
            Self::Sqrtlin => "regret_vs_sqrt_n",
            Self::Linlin => "regret_vs_n",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum AxesSpec {
    One(Axis),
    Many(Vec<Axis>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(default)]
    csv_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    svg: bool,
    #[serde(default)]
    axes: Option<AxesSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    set: SetSpec,
    learners: Vec<LearnerSpec>,
    adversary: Value,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    n_grid: Option<Vec<usize>>,
    #[serde(default = "one")]
    trials: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    outputs: Option<RawOutputs>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub csv_dir: PathBuf,
    pub svg: bool,
    pub axes: Vec<Axis>,
}

/// One adversary variant; `suffix` distinguishes the series when the
/// config lists several values of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceVariant {
    pub spec: SourceSpec,
    pub suffix: String,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub set: Arc<ConstraintSet>,
    pub learners: Vec<LearnerSpec>,
    pub sources: Vec<SourceVariant>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub trials: usize,
    pub master_seed: u64,
    pub outputs: Outputs,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(format!("at `{path}`: {}", e.into_inner()))
        })?;
        raw.validate()
    }

    /// Horizons at which mean regret is reported: the configured grid, or
    /// for a single `n` a log-spaced grid ending at `n`.
    pub fn horizons(&self) -> Vec<usize> {
        if let Some(g) = &self.n_grid {
            return g.clone();
        }
        let n = self.n.expect("validated: n or n_grid");
        default_grid(n)
    }

    pub fn n_max(&self) -> usize {
        self.horizons().into_iter().max().expect("non-empty grid")
    }
}

/// Up to 24 log-spaced horizons from 10 (or 1) to `n`.
pub fn default_grid(n: usize) -> Vec<usize> {
    let lo = 10.min(n).max(1) as f64;
    let pts = 24;
    let mut g: Vec<usize> = (0..pts)
        .map(|i| (lo.ln() + ((n as f64).ln() - lo.ln()) * i as f64 / (pts - 1) as f64).exp().round() as usize)
        .collect();
    g.push(n);
    g.sort_unstable();
    g.dedup();
    g
}

fn filesystem_safe(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl RawConfig {
    fn validate(self) -> Result<ExperimentConfig, CliError> {
        if !filesystem_safe(&self.name) {
            return Err(config_err(format!(
                "at `name`: {:?} is not filesystem-safe (letters, digits, '_', '-', '.')",
                self.name
            )));
        }
        let set = Arc::new(self.set.build().map_err(|e| config_err(format!("at `set`: {e}")))?);
        if self.learners.is_empty() {
            return Err(config_err("at `learners`: at least one learner is required"));
        }
        match (&self.n, &self.n_grid) {
            (None, None) => return Err(config_err("one of `n` or `n_grid` is required")),
            (Some(_), Some(_)) => return Err(config_err("give either `n` or `n_grid`, not both")),
            (Some(0), _) => return Err(config_err("at `n`: must be at least 1")),
            (_, Some(g)) if g.is_empty() || g.contains(&0) => {
                return Err(config_err("at `n_grid`: must be non-empty with every entry at least 1"))
            }
            _ => {}
        }
        if self.trials == 0 {
            return Err(config_err("at `trials`: must be at least 1"));
        }
        let sources = expand_adversary(&self.adversary)?;
        let d = set.dim();
        for v in &sources {
            v.spec.validate(d).map_err(|e| config_err(format!("at `adversary`: {e}")))?;
        }
        let horizon = self.n.or_else(|| self.n_grid.as_ref().and_then(|g| g.iter().max().copied()));
        for (i, l) in self.learners.iter().enumerate() {
            let m = sources[0].spec.declared_bound(d).map_err(|e| config_err(format!("at `adversary`: {e}")))?;
            l.build(&set, horizon, m).map_err(|e| config_err(format!("at `learners[{i}]`: {e}")))?;
        }
        let mut labels: Vec<String> = self.learners.iter().map(|l| l.label()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("at `learners`: labels must be unique (set `label` to tell repeats apart)"));
        }
        let raw_out = self.outputs.unwrap_or(RawOutputs { csv_dir: None, svg: true, axes: None });
        let axes = match raw_out.axes {
            None => vec![Axis::Loglin, Axis::Sqrtlin],
            Some(AxesSpec::One(a)) => vec![a],
            Some(AxesSpec::Many(v)) if v.is_empty() => return Err(config_err("at `outputs.axes`: empty list")),
            Some(AxesSpec::Many(mut v)) => {
                v.dedup();
                v
            }
        };
        Ok(ExperimentConfig {
            outputs: Outputs {
                csv_dir: raw_out.csv_dir.unwrap_or_else(|| PathBuf::from("out").join(&self.name)),
                svg: raw_out.svg,
                axes,
            },
            name: self.name,
            set,
            learners: self.learners,
            sources,
            n: self.n,
            n_grid: self.n_grid,
            trials: self.trials,
            master_seed: self.master_seed,
        })
    }
}

/// Splits an adversary whose `params.L` is a list into one strict
/// [`SourceSpec`] per value.
fn expand_adversary(value: &Value) -> Result<Vec<SourceVariant>, CliError> {
    let ls = value.get("params").and_then(|p| p.get("L")).and_then(Value::as_array).cloned();
    let parse = |v: Value, suffix: String| -> Result<SourceVariant, CliError> {
        let spec: SourceSpec = serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            config_err(format!("at `adversary.{path}`: {}", e.into_inner()))
        })?;
        Ok(SourceVariant { spec, suffix })
    };
    match ls {
        None => Ok(vec![parse(value.clone(), String::new())?]),
        Some(list) if list.is_empty() => Err(config_err("at `adversary.params.L`: empty list")),
        Some(list) => list
            .into_iter()
            .map(|l| {
                let suffix = format!("@L={}", l);
                let mut v = value.clone();
                v["params"]["L"] = l;
                parse(v, suffix)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "name": "t",
        "set": {"ball": {"radius": 1, "dim": 2}},
        "learners": [{"learner": "ftl"}, {"learner": "ftrl"}],
        "adversary": {"adversary": "stochastic", "params": {"L": [0, 0.1]}},
        "n": 50
    }"#;

    #[test]
    fn parses_and_expands_l() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.sources.len(), 2);
        assert_eq!(c.sources[1].suffix, "@L=0.1");
        assert_eq!(c.sources[1].spec.params.l, Some(0.1));
        assert_eq!(c.outputs.axes, vec![Axis::Loglin, Axis::Sqrtlin]);
        assert_eq!(*c.horizons().last().unwrap(), 50);
    }

    #[test]
    fn misspelled_keys_name_their_path() {
        let bad = BASE.replace("\"radius\"", "\"radus\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("radus"), "{e}");
        let bad = BASE.replace("\"L\"", "\"l\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("adversary.params") && e.contains('l'), "{e}");
        let bad = BASE.replace("\"learner\": \"ftrl\"", "\"learner\": \"ftrl\", \"params\": {\"bta\": 1}");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("learners[1]") && e.contains("bta"), "{e}");
    }

    #[test]
    fn rejects_empty_learners_and_bad_names() {
        let e = ExperimentConfig::parse(&BASE.replace(
            r#"[{"learner": "ftl"}, {"learner": "ftrl"}]"#,
            "[]",
        ))
        .unwrap_err();
        assert!(e.to_string().contains("learners"));
        assert!(ExperimentConfig::parse(&BASE.replace("\"t\"", "\"../x\"")).is_err());
    }

    #[test]
    fn grid_ends_at_n() {
        let g = default_grid(2500);
        assert_eq!((g[0], *g.last().unwrap()), (10, 2500));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_grid(1), vec![1]);
    }
}
