//! Simulation laboratory for KL-regularized contextual bandits with
//! preference feedback.
//!
//! The crate provides general-preference (tensor) and Bradley–Terry (matrix)
//! environments, maximum-likelihood fitters, greedy and optimistic online
//! learners, the offline greedy learner, exact value and suboptimality-gap
//! oracles, and a seeded experiment harness that writes CSV traces.

pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod harness;
pub mod learners;
pub mod model;
pub mod numeric;
pub mod seeding;

pub use error::{Error, Result};
