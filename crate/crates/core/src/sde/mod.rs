//! Simulation of the controlled scalar OU process.

pub mod noise;
pub mod ou;
mod sim;

pub use noise::NoiseSource;
pub use ou::{ou_exact_step, ou_step_moments, phi1, phi2, phi3, OuKernel};
pub use sim::{
    accumulate_cost, fmt_f64, simulate_controlled_path, ProblemDynamics, SimGrid, TrajectoryEvent,
    TrajectoryLog,
};
