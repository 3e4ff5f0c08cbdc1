//! Numerical self-checks: identities between the regret computations,
//! the inequalities behind the bounds, and the geometric facts they rest
//! on. Each check is a plain function with its sample sizes as arguments so
//! the acceptance tests can pin their own; [`run_suite`] runs the defaults.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::learners::OnlineLearner;

pub mod bounds;
pub mod geometry;
pub mod identities;
pub mod lemmas;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Identities,
    Lemmas,
    Bounds,
    Geometry,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["all", "identities", "lemmas", "bounds", "geometry"];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Identities => "identities",
            Self::Lemmas => "lemmas",
            Self::Bounds => "bounds",
            Self::Geometry => "geometry",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Self::All,
            "identities" => Self::Identities,
            "lemmas" => Self::Lemmas,
            "bounds" => Self::Bounds,
            "geometry" => Self::Geometry,
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown suite `{s}`, expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

/// Turns an error inside a check into a failed outcome, so one broken
/// check does not hide the rest of the suite.
pub(crate) fn guard(name: &str, r: Result<CheckOutcome>) -> CheckOutcome {
    r.unwrap_or_else(|e| CheckOutcome::new(name, false, format!("error: {e}")))
}

/// Drives `learner` to round `t` with a cumulative loss of (up to
/// rounding) `big_f`, split into `t − 1` equal losses.
pub(crate) fn drive_to(learner: &mut dyn OnlineLearner, big_f: &Vector, t: usize) -> Result<()> {
    if t > 1 {
        let step = big_f / (t - 1) as f64;
        for _ in 1..t {
            learner.predict()?;
            learner.observe(&step)?;
        }
    }
    Ok(())
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckOutcome> {
    match suite {
        Suite::All => [Suite::Geometry, Suite::Identities, Suite::Lemmas, Suite::Bounds]
            .into_iter()
            .flat_map(|s| run_suite(s, seed))
            .collect(),
        Suite::Geometry => geometry::default_checks(seed),
        Suite::Identities => identities::default_checks(seed),
        Suite::Lemmas => lemmas::default_checks(seed),
        Suite::Bounds => bounds::default_checks(seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().as_str(), name);
        }
        assert!("everything".parse::<Suite>().is_err());
    }
}
