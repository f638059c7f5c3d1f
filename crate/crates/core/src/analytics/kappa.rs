use crate::error::{ensure_finite, LabError, Result};

/// Arguments of the optimal-gain kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaInput {
    /// Remaining time.
    pub t: f64,
    pub beta: f64,
    pub a: f64,
}

impl KappaInput {
    pub fn eval(&self) -> Result<f64> {
        kappa(self.t, self.beta, self.a)
    }
}

/// `kappa(t, beta; a) = tanh(t rho) / (rho - a tanh(t rho))`, `rho = sqrt(a^2 + beta^2)`,
/// and `t` when `a = beta = 0`.
///
/// For `a > 0` the denominator is evaluated as
/// `beta^2 / (rho + a) + 2a / (e^{2 t rho} + 1)`, which avoids the
/// cancellation in `rho - a tanh(t rho)` when `beta` is small or `t rho` large.
pub fn kappa(t: f64, beta: f64, a: f64) -> Result<f64> {
    ensure_finite("t", t)?;
    ensure_finite("beta", beta)?;
    ensure_finite("a", a)?;
    if t < 0.0 {
        return Err(LabError::Domain(format!("kappa needs t >= 0, got {t}")));
    }
    if a == 0.0 && beta == 0.0 {
        return Ok(t);
    }
    let rho = a.hypot(beta);
    let x = t * rho;
    let th = x.tanh();
    let den = if a > 0.0 {
        beta * beta / (rho + a) + 2.0 * a / ((2.0 * x).exp() + 1.0)
    } else {
        rho - a * th
    };
    if den == 0.0 {
        return Err(LabError::Overflow(format!(
            "kappa(t={t}, beta={beta}, a={a}) exceeds f64 range"
        )));
    }
    if !(den > 0.0) {
        return Err(LabError::Numeric(format!(
            "kappa denominator {den} <= 0 at t={t}, beta={beta}, a={a}"
        )));
    }
    let k = th / den;
    if !k.is_finite() {
        return Err(LabError::Overflow(format!(
            "kappa(t={t}, beta={beta}, a={a}) exceeds f64 range"
        )));
    }
    Ok(k)
}
