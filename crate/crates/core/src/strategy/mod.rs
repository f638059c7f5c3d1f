//! Strategies: constant gain, optimal gain for an assumed `b`, and the
//! bounded-regret epoch automaton. Controllers never see the true `b`.

mod blueprint;
mod br;

pub use blueprint::{make_br, make_constant_gain, make_optimal_known, BlueprintKind, StrategyBlueprint};
pub use br::{
    br_control, br_transition, default_big_a, default_tau, BrParams, BrState, Regime, DEFAULT_K,
};

use crate::analytics::kappa;
use crate::error::{LabError, Result};

/// How the control behaves until the next grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    /// `u(s) = gain * q(s)`, applied continuously.
    Feedback { gain: f64 },
    /// `u(s) = u`, held.
    Hold { u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    /// Control at the query point.
    pub u: f64,
    pub law: ControlLaw,
    /// Latest time at which the controller must be consulted again.
    pub next_deadline: f64,
    /// Request the fine testing step.
    pub fine_step: bool,
}

/// Per-path controller instantiated from a blueprint.
#[derive(Debug, Clone)]
pub struct Controller {
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Constant { alpha: f64, horizon: f64 },
    Optimal { beta: f64, a: f64, horizon: f64 },
    Br { params: BrParams, state: BrState },
}

impl Controller {
    pub(crate) fn new(bp: &StrategyBlueprint, horizon: f64) -> Self {
        let inner = match &bp.kind {
            BlueprintKind::ConstantGain { alpha } => Inner::Constant { alpha: *alpha, horizon },
            BlueprintKind::OptimalKnownB { beta, a, horizon } => {
                Inner::Optimal { beta: *beta, a: *a, horizon: *horizon }
            }
            BlueprintKind::Br(p) => Inner::Br { params: p.clone(), state: p.initial_state() },
        };
        Controller { inner }
    }

    pub fn decide(&self, t: f64, q: f64) -> Result<ControlDecision> {
        let d = match &self.inner {
            Inner::Constant { alpha, horizon } => ControlDecision {
                u: -alpha * q,
                law: ControlLaw::Feedback { gain: -alpha },
                next_deadline: *horizon,
                fine_step: false,
            },
            Inner::Optimal { beta, a, horizon } => {
                let gain = -beta * kappa((horizon - t).max(0.0), *beta, *a)?;
                ControlDecision {
                    u: gain * q,
                    law: ControlLaw::Feedback { gain },
                    next_deadline: *horizon,
                    fine_step: false,
                }
            }
            Inner::Br { params, state } => return br_control(params, state, t, q),
        };
        if !d.u.is_finite() {
            return Err(LabError::Strategy {
                message: format!("non-finite control at t={t}, q={q}"),
                state: format!("{:?}", self.inner),
            });
        }
        Ok(d)
    }

    /// Feed the position at grid time `t`; returns the tag of a state change.
    pub fn observe(&mut self, t: f64, q: f64) -> Result<Option<String>> {
        if let Inner::Br { params, state } = &mut self.inner {
            let next = br_transition(params, state, t, q)?;
            if next != *state {
                let tag = next.tag();
                *state = next;
                return Ok(Some(tag));
            }
        }
        Ok(None)
    }

    pub fn br_state(&self) -> Option<&BrState> {
        match &self.inner {
            Inner::Br { state, .. } => Some(state),
            _ => None,
        }
    }
}

/// Controls a fresh controller would issue along a recorded `(t, q)` history.
pub fn replay(bp: &StrategyBlueprint, horizon: f64, times: &[f64], positions: &[f64]) -> Result<Vec<f64>> {
    if times.len() != positions.len() {
        return Err(LabError::Schema("times and positions differ in length".into()));
    }
    let mut c = bp.instantiate(horizon)?;
    let mut out = Vec::with_capacity(times.len());
    for (i, (&t, &q)) in times.iter().zip(positions).enumerate() {
        if i > 0 {
            c.observe(t, q)?;
        }
        out.push(c.decide(t, q)?.u);
    }
    Ok(out)
}
