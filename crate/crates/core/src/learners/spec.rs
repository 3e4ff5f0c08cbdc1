use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, Vector};

use super::{AbProd, AbProdParams, Ftl, Ftrl, Ftsl, OnlineLearner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ftl,
    Ftrl,
    Ftsl,
    Abprod,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ftl => "ftl",
            Self::Ftrl => "ftrl",
            Self::Ftsl => "ftsl",
            Self::Abprod => "abprod",
        }
    }
}

/// `{"learner": "ftl" | "ftrl" | "ftsl" | "abprod", "params": {...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub learner: LearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub params: LearnerParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerParams {
    /// ftl: first-round prediction
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<Vec<f64>>,
    /// abprod: sub-learner A (default ftl)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Box<LearnerSpec>>,
    /// abprod: sub-learner B (default ftrl)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Box<LearnerSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// abprod: loss-norm bound used for the default scale
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<f64>,
}

impl LearnerSpec {
    pub fn new(learner: LearnerKind) -> Self {
        Self { learner, label: None, params: LearnerParams::default() }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.learner.as_str().to_string())
    }

    /// Rejects parameters that do not belong to the chosen learner.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let mut present: Vec<&str> = Vec::new();
        if p.w1.is_some() {
            present.push("w1");
        }
        for (key, set) in [
            ("a", p.a.is_some()),
            ("b", p.b.is_some()),
            ("beta", p.beta.is_some()),
            ("eta", p.eta.is_some()),
            ("scale", p.scale.is_some()),
            ("m_bound", p.m_bound.is_some()),
        ] {
            if set {
                present.push(key);
            }
        }
        let allowed: &[&str] = match self.learner {
            LearnerKind::Ftl => &["w1"],
            LearnerKind::Ftrl | LearnerKind::Ftsl => &[],
            LearnerKind::Abprod => &["a", "b", "beta", "eta", "scale", "m_bound"],
        };
        if let Some(bad) = present.iter().find(|k| !allowed.contains(k)) {
            return Err(Error::Precondition(format!(
                "parameter `params.{bad}` does not apply to learner `{}`",
                self.learner.as_str()
            )));
        }
        if let Some(a) = &p.a {
            a.validate()?;
        }
        if let Some(b) = &p.b {
            b.validate()?;
        }
        Ok(())
    }

    /// Instantiates the learner. `loss_bound` is the declared bound on
    /// `‖f‖₂` of the loss source it will face.
    pub fn build(
        &self,
        set: &Arc<ConstraintSet>,
        horizon: Option<usize>,
        loss_bound: f64,
    ) -> Result<Box<dyn OnlineLearner>> {
        self.validate()?;
        Ok(match self.learner {
            LearnerKind::Ftl => {
                let mut l = Ftl::new(set.clone()).with_loss_bound(loss_bound);
                if let Some(w1) = &self.params.w1 {
                    l = l.with_first(Vector::from_column_slice(w1))?;
                }
                Box::new(l)
            }
            LearnerKind::Ftrl => Box::new(Ftrl::new(set.clone())?.with_loss_bound(loss_bound)),
            LearnerKind::Ftsl => {
                let n = horizon.ok_or(Error::MissingHorizon { learner: "ftsl" })?;
                Box::new(Ftsl::new(set.clone(), n)?.with_loss_bound(loss_bound))
            }
            LearnerKind::Abprod => {
                let n = horizon.ok_or(Error::MissingHorizon { learner: "abprod" })?;
                let a_spec = self.params.a.as_deref().cloned().unwrap_or(LearnerSpec::new(LearnerKind::Ftl));
                let b_spec = self.params.b.as_deref().cloned().unwrap_or(LearnerSpec::new(LearnerKind::Ftrl));
                let a = a_spec.build(set, horizon, loss_bound)?;
                let b = b_spec.build(set, horizon, loss_bound)?;
                let m = self.params.m_bound.unwrap_or(loss_bound);
                let params = AbProdParams { beta: self.params.beta, eta: self.params.eta, scale: self.params.scale };
                Box::new(AbProd::new(a, b, set.clone(), n, m, params)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_nested_specs() {
        let s: LearnerSpec = serde_json::from_str(r#"{"learner": "ftl"}"#).unwrap();
        assert_eq!(s.learner, LearnerKind::Ftl);
        let s: LearnerSpec = serde_json::from_str(
            r#"{"learner": "abprod", "params": {"a": {"learner": "ftl"}, "b": {"learner": "ftsl"}, "beta": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(s.params.b.as_ref().unwrap().learner, LearnerKind::Ftsl);
        assert_eq!(s.label(), "abprod");
    }

    #[test]
    fn strict_parsing() {
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"learner": "ftl", "parms": {}}"#).is_err());
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"learner": "ftl", "params": {"bta": 1}}"#).is_err());
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"learner": "hedge"}"#).is_err());
        let s: LearnerSpec = serde_json::from_str(r#"{"learner": "ftrl", "params": {"beta": 0.3}}"#).unwrap();
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("params.beta"), "{err}");
    }

    #[test]
    fn build_checks_horizon() {
        let set = Arc::new(ConstraintSet::ball(1.0, 3).unwrap());
        let s = LearnerSpec::new(LearnerKind::Ftsl);
        assert!(matches!(s.build(&set, None, 1.0), Err(Error::MissingHorizon { .. })));
        let mut l = s.build(&set, Some(10), 1.0).unwrap();
        assert_eq!(l.predict().unwrap(), Vector::zeros(3));
        let ab = LearnerSpec::new(LearnerKind::Abprod).build(&set, Some(10), 1.0).unwrap();
        assert_eq!(ab.name(), "abprod(ftl,ftrl)");
    }
}
