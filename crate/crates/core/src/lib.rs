//! Online linear prediction over convex constraint sets.
//!
//! The crate is organised around a game loop: a [`learners::OnlineLearner`]
//! predicts a point of a [`geometry::ConstraintSet`], a
//! [`adversaries::LossSource`] reveals a linear loss, and [`engine`] records
//! the trace from which every regret variant is computed. [`bounds`] holds
//! the closed-form guarantees and the Monte-Carlo drivers.

pub mod adversaries;
pub mod bounds;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod learners;
pub mod rng;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ConstraintSet, Norm, Vector};
