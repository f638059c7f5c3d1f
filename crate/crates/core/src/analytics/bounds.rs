//! Constant-gain cost bounds and lower-bound regimes of the optimal cost.

use super::kappa::kappa;
use crate::error::{ensure_finite, LabError, Result};

/// Upper bound on the expected cost of `u = -alpha q`.
///
/// Uses `(q0^2 + T)(1 + alpha^2) / |a - b alpha|` when `a < b alpha`, and
/// `(q0^2 + T) e^{2aT} / (2a)` for `alpha = 0`, `a > 0`.
pub fn cg_cost_bound(alpha: f64, a: f64, b: f64, horizon: f64, q0: f64) -> Result<f64> {
    for (name, x) in [("alpha", alpha), ("a", a), ("b", b), ("T", horizon), ("q0", q0)] {
        ensure_finite(name, x)?;
    }
    let base = q0 * q0 + horizon;
    let value = if a < b * alpha {
        base * (1.0 + alpha * alpha) / (a - b * alpha).abs()
    } else if alpha == 0.0 && a > 0.0 {
        base * (2.0 * a * horizon).exp() / (2.0 * a)
    } else {
        return Err(LabError::Hypothesis(format!(
            "cost bound needs a < b*alpha, or alpha = 0 with a > 0 (alpha={alpha}, a={a}, b={b})"
        )));
    };
    if !value.is_finite() {
        return Err(LabError::Overflow(format!("cost bound overflows at a={a}, T={horizon}")));
    }
    Ok(value)
}

/// Which lower-bound expression applies to `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundRegime {
    /// `a >= 1`, `|b| <= a e^{-aT}`: bound `e^{2aT} / a`.
    TinyB,
    /// `a >= 1`, `a e^{-aT} <= |b| <= a`: bound `a / b^2`.
    MidB,
    /// `a >= 1`, `|b| >= a`: bound `1 / |b|`.
    LargeB,
    /// `a < 1`: bound `1 / (1 + |a| + |b|)`.
    SmallA,
}

impl LowerBoundRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            LowerBoundRegime::TinyB => "|b| <= a*exp(-aT)",
            LowerBoundRegime::MidB => "a*exp(-aT) <= |b| <= a",
            LowerBoundRegime::LargeB => "|b| >= a",
            LowerBoundRegime::SmallA => "a < 1",
        }
    }
}

/// Case tag and `cT * q0^2 * (case expression)`. `cT` is supplied by the caller.
pub fn opt_lower_bound(
    a: f64,
    b: f64,
    horizon: f64,
    q0: f64,
    c_t: f64,
) -> Result<(LowerBoundRegime, f64)> {
    for (name, x) in [("a", a), ("b", b), ("T", horizon), ("q0", q0), ("cT", c_t)] {
        ensure_finite(name, x)?;
    }
    if !(c_t > 0.0) {
        return Err(LabError::Domain(format!("cT must be > 0, got {c_t}")));
    }
    let bb = b.abs();
    let (regime, expr) = if a >= 1.0 {
        if bb <= a * (-a * horizon).exp() {
            (LowerBoundRegime::TinyB, (2.0 * a * horizon).exp() / a)
        } else if bb <= a {
            (LowerBoundRegime::MidB, a / (b * b))
        } else {
            (LowerBoundRegime::LargeB, 1.0 / bb)
        }
    } else {
        (LowerBoundRegime::SmallA, 1.0 / (1.0 + a.abs() + bb))
    };
    let value = c_t * q0 * q0 * expr;
    if !value.is_finite() {
        return Err(LabError::Overflow(format!("lower bound overflows at a={a}, T={horizon}")));
    }
    Ok((regime, value))
}

/// The constant-free floor `q0^2 kappa(T, b)`, a summand of the optimal cost.
pub fn opt_kappa_floor(a: f64, b: f64, horizon: f64, q0: f64) -> Result<f64> {
    Ok(q0 * q0 * kappa(horizon, b, a)?)
}
