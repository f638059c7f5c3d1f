//! Expected costs of simple feedback strategies `u = -v(t) q`.

use super::kappa::kappa;
use super::quad::integrate;
use crate::error::{ensure_finite, LabError, Result};
use crate::sde::ou::{phi1, phi2};

const KAPPA_TOL: f64 = 1e-10;
const PHI_TOL: f64 = 1e-8;
const INNER_TOL: f64 = 1e-11;

/// Gain function `v(t)` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GainFn {
    Constant(f64),
    /// `v(t) = beta * kappa(T - t, beta; a)`.
    Optimal { beta: f64, a: f64 },
    /// Piecewise-linear interpolation through `(times[i], values[i])`.
    Table { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule {
    pub v: GainFn,
    pub horizon: f64,
}

impl GainSchedule {
    pub fn new(v: GainFn, horizon: f64) -> Result<Self> {
        ensure_finite("horizon", horizon)?;
        if horizon <= 0.0 {
            return Err(LabError::Domain(format!("horizon must be > 0, got {horizon}")));
        }
        match &v {
            GainFn::Constant(alpha) => ensure_finite("alpha", *alpha)?,
            GainFn::Optimal { beta, a } => {
                ensure_finite("beta", *beta)?;
                ensure_finite("a", *a)?;
            }
            GainFn::Table { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(LabError::Schema(
                        "gain table needs >= 2 points and equal lengths".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(LabError::Schema("gain table times must increase".into()));
                }
                if times[0] > 0.0 || *times.last().unwrap() < horizon {
                    return Err(LabError::Schema("gain table must cover [0, T]".into()));
                }
            }
        }
        let gs = GainSchedule { v, horizon };
        // Boundedness check by sampling.
        for i in 0..=256 {
            let t = horizon * i as f64 / 256.0;
            ensure_finite("v(t)", gs.gain(t)?)?;
        }
        Ok(gs)
    }

    pub fn constant(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(GainFn::Constant(alpha), horizon)
    }

    pub fn optimal(beta: f64, a: f64, horizon: f64) -> Result<Self> {
        Self::new(GainFn::Optimal { beta, a }, horizon)
    }

    pub fn gain(&self, t: f64) -> Result<f64> {
        match &self.v {
            GainFn::Constant(alpha) => Ok(*alpha),
            GainFn::Optimal { beta, a } => {
                Ok(beta * kappa((self.horizon - t).max(0.0), *beta, *a)?)
            }
            GainFn::Table { times, values } => {
                let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Ok(values[i - 1] + w * (values[i] - values[i - 1]))
            }
        }
    }
}

fn check_t(t: f64, horizon: f64) -> Result<()> {
    ensure_finite("t", t)?;
    if !(0.0..=horizon).contains(&t) {
        return Err(LabError::Domain(format!("t={t} outside [0, {horizon}]")));
    }
    Ok(())
}

fn finite_or_overflow(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LabError::Overflow(format!("{what} exceeds f64 range")))
    }
}

/// Closed form of `phi` for a constant gain.
fn phi_constant(t: f64, alpha: f64, a: f64, b: f64, horizon: f64) -> Result<f64> {
    let s = horizon - t;
    let lambda = a - b * alpha;
    finite_or_overflow((1.0 + alpha * alpha) * s * phi1(2.0 * lambda * s), "phi")
}

/// `phi(t) = int_t^T (1 + v(r)^2) exp(2 int_t^r (a - b v(s)) ds) dr` by nested
/// adaptive quadrature, whatever the gain.
pub fn phi_quadrature(t: f64, gain: &GainSchedule, a: f64, b: f64) -> Result<f64> {
    check_t(t, gain.horizon)?;
    let outer = |r: f64| -> Result<f64> {
        let v = gain.gain(r)?;
        let exponent = integrate(|s| Ok(a - b * gain.gain(s)?), t, r, INNER_TOL, 1e-300)?;
        finite_or_overflow((1.0 + v * v) * (2.0 * exponent).exp(), "phi integrand")
    };
    integrate(outer, t, gain.horizon, PHI_TOL * 1e-2, 1e-300)
}

/// `phi(t, b)` for the gain schedule; closed form when the gain is constant.
pub fn phi(t: f64, gain: &GainSchedule, a: f64, b: f64) -> Result<f64> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    check_t(t, gain.horizon)?;
    match gain.v {
        GainFn::Constant(alpha) => phi_constant(t, alpha, a, b, gain.horizon),
        _ => phi_quadrature(t, gain, a, b),
    }
}

/// `ECost = phi(0) q0^2 + int_0^T phi(t) dt` for `u = -v(t) q`.
pub fn ecost_simple_feedback(gain: &GainSchedule, a: f64, b: f64, q0: f64) -> Result<f64> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    ensure_finite("q0", q0)?;
    let horizon = gain.horizon;
    match gain.v {
        GainFn::Constant(alpha) => {
            let y = 2.0 * (a - b * alpha) * horizon;
            let w = 1.0 + alpha * alpha;
            finite_or_overflow(
                w * (horizon * phi1(y) * q0 * q0 + horizon * horizon * phi2(y)),
                "expected cost",
            )
        }
        _ => {
            let head = phi_quadrature(0.0, gain, a, b)? * q0 * q0;
            let tail = integrate(|t| phi_quadrature(t, gain, a, b), 0.0, horizon, PHI_TOL, 1e-300)?;
            finite_or_overflow(head + tail, "expected cost")
        }
    }
}

/// Optimal expected cost for known `b`: `kappa(T, b) q0^2 + int_0^T kappa(t, b) dt`.
pub fn ecost_opt(a: f64, b: f64, horizon: f64, q0: f64) -> Result<f64> {
    ensure_finite("q0", q0)?;
    ensure_finite("horizon", horizon)?;
    if horizon <= 0.0 {
        return Err(LabError::Domain(format!("horizon must be > 0, got {horizon}")));
    }
    let head = kappa(horizon, b, a)? * q0 * q0;
    let tail = integrate(|t| kappa(t, b, a), 0.0, horizon, KAPPA_TOL, 1e-300)?;
    finite_or_overflow(head + tail, "optimal expected cost")
}
