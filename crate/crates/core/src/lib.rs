//! Simulation and analysis of adaptive control for `dq = (a q + b u) dt + dW`
//! when the sign and size of `b` are unknown.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod sde;
pub mod strategy;

pub use error::{LabError, Result};
