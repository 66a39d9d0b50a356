//! Object-goal navigation for a simulated quadcopter: environment, network
//! kernel, off-policy learners, self-predictive representations, evaluation
//! metrics and the experiment harness.

pub mod env;
pub mod metrics;
pub mod error;
pub mod harness;
pub mod nn;
pub mod rl;
pub mod srl;

pub use error::{Error, Result};
