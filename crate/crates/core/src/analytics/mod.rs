//! Closed-form and quadrature quantities for the scalar problem.

mod bounds;
mod feedback;
mod kappa;
mod law;
pub mod quad;

pub use bounds::{cg_cost_bound, opt_kappa_floor, opt_lower_bound, LowerBoundRegime};
pub use feedback::{
    ecost_opt, ecost_simple_feedback, phi, phi_quadrature, GainFn, GainSchedule,
};
pub use kappa::{kappa, KappaInput};
pub use law::{reflection_sup_prob, x_process_moments};
