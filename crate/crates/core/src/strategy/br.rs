//! The bounded-regret epoch automaton.
//!
//! All thresholds are evaluated in the mirrored frame `q_m = sign(q0) q`, where
//! the starting point is positive. Feedback gains are unchanged by the mirror
//! and held controls pick up the sign. Entry positions stored in [`BrState`]
//! are mirrored-frame values.

use super::{ControlDecision, ControlLaw};
use crate::error::{ensure_finite, LabError, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_K: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `a > A`.
    LargeA,
    /// `|a| <= A`.
    BoundedA,
    /// `a < -A`.
    NegativeA,
}

impl Regime {
    pub fn classify(a: f64, big_a: f64) -> Regime {
        if a > big_a {
            Regime::LargeA
        } else if a < -big_a {
            Regime::NegativeA
        } else {
            Regime::BoundedA
        }
    }
}

/// Default regime threshold; depends on the horizon only.
pub fn default_big_a(horizon: f64) -> f64 {
    2.0f64.max(1.0 / (5.0 * horizon))
}

/// Default testing duration `(ln 1.1)^2 / (a (nu* + 1)^2)`.
pub fn default_tau(a: f64, nu_star: u32) -> f64 {
    let l = 1.1f64.ln();
    let n = nu_star as f64 + 1.0;
    l * l / (a * n * n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrParams {
    pub regime: Regime,
    pub big_a: f64,
    pub k_gain: f64,
    /// Testing duration; only meaningful for [`Regime::LargeA`], zero otherwise.
    pub tau: f64,
    /// `floor(a T)` for [`Regime::LargeA`], zero otherwise.
    pub nu_star: u32,
    pub a: f64,
    pub horizon: f64,
    pub q0: f64,
}

impl BrParams {
    pub fn new(a: f64, horizon: f64, q0: f64) -> Result<Self> {
        Self::with_constants(a, horizon, q0, None, None, None)
    }

    /// Build with optional overrides of `A`, `K` and `tau`; everything is validated.
    pub fn with_constants(
        a: f64,
        horizon: f64,
        q0: f64,
        big_a: Option<f64>,
        k_gain: Option<f64>,
        tau: Option<f64>,
    ) -> Result<Self> {
        ensure_finite("a", a)?;
        ensure_finite("T", horizon)?;
        ensure_finite("q0", q0)?;
        if horizon <= 0.0 {
            return Err(LabError::Domain(format!("T must be > 0, got {horizon}")));
        }
        if q0.abs() < 1.0 {
            return Err(LabError::Hypothesis(format!(
                "the epoch strategy needs |q0| >= 1, got {q0}"
            )));
        }
        let big_a = big_a.unwrap_or_else(|| default_big_a(horizon));
        let k_gain = k_gain.unwrap_or(DEFAULT_K);
        let regime = Regime::classify(a, big_a);
        let (nu_star, tau) = match regime {
            Regime::LargeA => {
                let nu_star = (a * horizon).floor() as u32;
                (nu_star, tau.unwrap_or_else(|| default_tau(a, nu_star)))
            }
            _ => (0, tau.unwrap_or(0.0)),
        };
        let p = BrParams { regime, big_a, k_gain, tau, nu_star, a, horizon, q0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("A", self.big_a),
            ("K", self.k_gain),
            ("tau", self.tau),
            ("a", self.a),
            ("T", self.horizon),
            ("q0", self.q0),
        ] {
            ensure_finite(name, x)?;
        }
        if self.q0.abs() < 1.0 {
            return Err(LabError::Hypothesis(format!("|q0| >= 1 required, got {}", self.q0)));
        }
        if !(self.big_a >= 2.0 && self.big_a > 1.0 / (5.0 * self.horizon)) {
            return Err(LabError::Domain(format!(
                "A must satisfy A >= 2 and A > 1/(5T), got {}",
                self.big_a
            )));
        }
        if !(self.k_gain >= 1000.0) {
            return Err(LabError::Domain(format!("K must be >= 1000, got {}", self.k_gain)));
        }
        if Regime::classify(self.a, self.big_a) != self.regime {
            return Err(LabError::Domain(format!(
                "regime {:?} does not match a={} with A={}",
                self.regime, self.a, self.big_a
            )));
        }
        if self.regime == Regime::LargeA {
            let want = (self.a * self.horizon).floor();
            if self.nu_star as f64 != want {
                return Err(LabError::Domain(format!(
                    "nu_star must be floor(aT) = {want}, got {}",
                    self.nu_star
                )));
            }
            let s = (self.a * self.tau).sqrt();
            let n = self.nu_star as i32;
            if !(self.tau > 0.0
                && self.tau < 1.0 / self.a
                && (1.0 + s).powi(n) < 1.1
                && (1.0 - s).powi(n) > 0.9)
            {
                return Err(LabError::Domain(format!(
                    "tau={} violates the testing-distortion constraints for a={}, nu*={}",
                    self.tau, self.a, self.nu_star
                )));
            }
        }
        Ok(())
    }

    pub fn sign(&self) -> f64 {
        if self.q0 < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Starting state of the automaton.
    pub fn initial_state(&self) -> BrState {
        match self.regime {
            Regime::LargeA => BrState::Ep0Test,
            Regime::BoundedA => BrState::B0,
            Regime::NegativeA => BrState::N0,
        }
    }
}

/// Automaton state. Positions are mirrored-frame values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BrState {
    Ep0Test,
    /// `sign = +1` after the upper threshold (`u = K q`), `-1` after the lower one.
    Ep0Control { sign: i8, t_entry: f64, q_entry: f64 },
    EpNuTest { nu: u32, t_entry: f64, q_entry: f64, deadline: f64, passages: u32 },
    EpNuControlII { nu: u32, t_entry: f64, q_entry: f64, passages: u32 },
    EpNuControlIII { nu: u32, t_entry: f64, q_entry: f64, passages: u32 },
    Apathy { t_entry: f64 },
    B0,
    B1 { t_entry: f64, q_entry: f64 },
    B2 { t_entry: f64 },
    N0,
    N1Control { sign: i8, t_entry: f64, q_entry: f64 },
    N1Apathy { t_entry: f64 },
    N2 { t_entry: f64 },
}

impl BrState {
    fn regime(&self) -> Regime {
        use BrState::*;
        match self {
            Ep0Test | Ep0Control { .. } | EpNuTest { .. } | EpNuControlII { .. }
            | EpNuControlIII { .. } | Apathy { .. } => Regime::LargeA,
            B0 | B1 { .. } | B2 { .. } => Regime::BoundedA,
            N0 | N1Control { .. } | N1Apathy { .. } | N2 { .. } => Regime::NegativeA,
        }
    }

    /// Event tag emitted on entering this state.
    pub fn tag(&self) -> String {
        use BrState::*;
        match self {
            Ep0Test => "0.i".into(),
            Ep0Control { sign, .. } => if *sign > 0 { "0.ii+" } else { "0.ii-" }.into(),
            EpNuTest { nu, .. } => format!("{nu}.i"),
            EpNuControlII { nu, .. } => format!("{nu}.ii"),
            EpNuControlIII { nu, .. } => format!("{nu}.iii"),
            Apathy { .. } => "apathy".into(),
            B0 => "b0".into(),
            B1 { .. } => "b1".into(),
            B2 { .. } => "b2".into(),
            N0 => "n0".into(),
            N1Control { sign, .. } => if *sign > 0 { "n1+" } else { "n1-" }.into(),
            N1Apathy { .. } => "n1.apathy".into(),
            N2 { .. } => "n2".into(),
        }
    }
}

fn check_consistent(params: &BrParams, state: &BrState) -> Result<()> {
    if state.regime() != params.regime {
        return Err(LabError::InternalState(format!(
            "state {state:?} does not belong to regime {:?}",
            params.regime
        )));
    }
    if let BrState::EpNuTest { nu, .. }
    | BrState::EpNuControlII { nu, .. }
    | BrState::EpNuControlIII { nu, .. } = state
    {
        if *nu == 0 || *nu > params.nu_star {
            return Err(LabError::InternalState(format!(
                "epoch {nu} outside [1, {}]",
                params.nu_star
            )));
        }
    }
    Ok(())
}

fn feedback(gain: f64, q: f64, deadline: f64) -> ControlDecision {
    ControlDecision {
        u: gain * q,
        law: ControlLaw::Feedback { gain },
        next_deadline: deadline,
        fine_step: false,
    }
}

fn hold(u: f64, deadline: f64, fine_step: bool) -> ControlDecision {
    ControlDecision { u, law: ControlLaw::Hold { u }, next_deadline: deadline, fine_step }
}

/// Control for the active (sub)epoch at observed position `q`.
pub fn br_control(params: &BrParams, state: &BrState, t: f64, q: f64) -> Result<ControlDecision> {
    check_consistent(params, state)?;
    ensure_finite("q", q)?;
    if t > params.horizon {
        return Err(LabError::Domain(format!("t={t} beyond horizon {}", params.horizon)));
    }
    let big_t = params.horizon;
    let k = params.k_gain;
    let s = params.sign();
    use BrState::*;
    let d = match state {
        Ep0Test => feedback(-1.0, q, (1.0 / (10.0 * params.a)).min(big_t)),
        Ep0Control { sign, .. } => feedback(*sign as f64 * k, q, big_t),
        EpNuTest { nu, q_entry, deadline, .. } => {
            let u = (*nu as f64).exp() * q_entry / (params.a * params.tau).sqrt();
            hold(s * u, *deadline, true)
        }
        EpNuControlII { nu, .. } => feedback(k * (*nu as f64).exp(), q, big_t),
        EpNuControlIII { nu, .. } => feedback(-k * (*nu as f64).exp(), q, big_t),
        B0 => feedback(-1.0, q, big_t),
        B1 { .. } => feedback(1.0, q, big_t),
        N0 => feedback(-1.0, q, (1.0 / (10.0 * params.a.abs())).min(big_t)),
        N1Control { sign, .. } => feedback(*sign as f64 * k, q, big_t),
        Apathy { .. } | B2 { .. } | N1Apathy { .. } | N2 { .. } => hold(0.0, big_t, false),
    };
    if !d.u.is_finite() {
        return Err(LabError::Strategy {
            message: format!("non-finite control at t={t}, q={q}"),
            state: format!("{state:?}"),
        });
    }
    Ok(d)
}

fn enter_epoch(params: &BrParams, nu: u32, t: f64, q: f64, passages: u32) -> BrState {
    if nu <= params.nu_star {
        BrState::EpNuTest {
            nu,
            t_entry: t,
            q_entry: q,
            deadline: params.horizon.min(t + params.tau),
            passages,
        }
    } else {
        BrState::Apathy { t_entry: t }
    }
}

/// Successor state after observing `q` at grid time `t`.
pub fn br_transition(params: &BrParams, state: &BrState, t: f64, q: f64) -> Result<BrState> {
    check_consistent(params, state)?;
    ensure_finite("q", q)?;
    let qm = params.sign() * q;
    let q0 = params.q0.abs();
    use BrState::*;
    let next = match state {
        Ep0Test => {
            if qm >= 2.0 * q0 {
                Ep0Control { sign: 1, t_entry: t, q_entry: qm }
            } else if qm <= 0.5 * q0 {
                Ep0Control { sign: -1, t_entry: t, q_entry: qm }
            } else if t >= 1.0 / (10.0 * params.a) {
                enter_epoch(params, 1, t, qm, 0)
            } else {
                state.clone()
            }
        }
        Ep0Control { q_entry, .. } => {
            if qm.abs() >= 2.0 * q_entry.abs() {
                enter_epoch(params, 1, t, qm, 1)
            } else {
                state.clone()
            }
        }
        EpNuTest { nu, q_entry, deadline, passages, .. } => {
            if (qm - q_entry).abs() > q_entry.abs() * (params.a * params.tau).sqrt() {
                EpNuControlII { nu: *nu, t_entry: t, q_entry: qm, passages: *passages }
            } else if t >= *deadline && *deadline < params.horizon {
                enter_epoch(params, nu + 1, t, qm, *passages)
            } else {
                state.clone()
            }
        }
        EpNuControlII { nu, q_entry, passages, .. } => {
            if qm.abs() >= 2.0 * q_entry.abs() {
                EpNuControlIII { nu: *nu, t_entry: t, q_entry: qm, passages: *passages }
            } else {
                state.clone()
            }
        }
        EpNuControlIII { nu, q_entry, passages, .. } => {
            if qm.abs() >= 2.0 * q_entry.abs() {
                enter_epoch(params, nu + 1, t, qm, passages + 1)
            } else {
                state.clone()
            }
        }
        B0 => {
            if qm.abs() >= 2.0 * q0 {
                B1 { t_entry: t, q_entry: qm }
            } else {
                B0
            }
        }
        B1 { .. } => {
            if qm.abs() >= 4.0 * q0 {
                B2 { t_entry: t }
            } else {
                state.clone()
            }
        }
        N0 => {
            if qm >= 2.0 * q0 {
                N1Control { sign: 1, t_entry: t, q_entry: qm }
            } else if qm <= 0.5 * q0 {
                N1Control { sign: -1, t_entry: t, q_entry: qm }
            } else if t >= 1.0 / (10.0 * params.a.abs()) {
                N1Apathy { t_entry: t }
            } else {
                N0
            }
        }
        N1Control { .. } => {
            if qm.abs() >= 4.0 * q0 {
                N2 { t_entry: t }
            } else {
                state.clone()
            }
        }
        Apathy { .. } | B2 { .. } | N1Apathy { .. } | N2 { .. } => state.clone(),
    };
    Ok(next)
}
