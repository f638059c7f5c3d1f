//! Monte Carlo cost estimates, regret sweeps and hitting-event frequencies.

mod lemma;
mod mc;
mod sweep;

pub use lemma::{
    estimate_lemma_bkpl, estimate_lemma_nhl, estimate_sup_crossing, nhl_horizon, LemmaId,
    LemmaTrialSpec, ProbEstimate, BAND_STEPS,
};
pub use mc::{estimate_expected_cost, pairwise_sum, CostEstimate, McConfig};
pub use sweep::{
    regret_sweep, regret_sweep_with, worst_case_regret, RegretRow, StrategySpec, WorstCase,
};
