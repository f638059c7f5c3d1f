//! Law of `X(t) = int_0^t e^{-alpha s} (beta ds + dW(s))` and its running maximum.

use crate::error::{ensure_finite, LabError, Result};
use crate::sde::ou::phi1;
use libm::erfc;

/// `(E X(t), Var X(t)) = (beta (1 - e^{-alpha t}) / alpha, (1 - e^{-2 alpha t}) / (2 alpha))`,
/// with the `alpha = 0` limits `(beta t, t)`.
pub fn x_process_moments(alpha: f64, beta_drift: f64, t: f64) -> Result<(f64, f64)> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("beta_drift", beta_drift)?;
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(LabError::Domain(format!("t must be >= 0, got {t}")));
    }
    let mean = beta_drift * t * phi1(-alpha * t);
    let var = t * phi1(-2.0 * alpha * t);
    if !mean.is_finite() || !var.is_finite() {
        return Err(LabError::Overflow(format!(
            "moments overflow at alpha={alpha}, t={t}"
        )));
    }
    Ok((mean, var))
}

/// `P[sup_{s <= t} (X(s) - E X(s)) >= M] = 2 (1 - Phi(M / sigma))`.
pub fn reflection_sup_prob(alpha: f64, t: f64, level: f64) -> Result<f64> {
    ensure_finite("level", level)?;
    if !(level > 0.0) {
        return Err(LabError::Domain(format!("level must be > 0, got {level}")));
    }
    if !(t > 0.0) {
        return Err(LabError::Domain(format!("t must be > 0, got {t}")));
    }
    let (_, var) = x_process_moments(alpha, 0.0, t)?;
    let sigma = var.sqrt();
    if !(sigma > 0.0) {
        return Err(LabError::DegenerateLaw(format!(
            "X(t) has zero variance at alpha={alpha}, t={t}"
        )));
    }
    // 2 (1 - Phi(x)) = erfc(x / sqrt 2)
    Ok(erfc(level / sigma / std::f64::consts::SQRT_2))
}
