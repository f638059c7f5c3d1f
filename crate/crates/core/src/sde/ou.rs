//! Exact Gaussian transitions of `dq = (alpha q + drive) dt + dW`.
//!
//! Everything is written in terms of the entire functions
//! `phi_k(y) = sum_n y^n / (n + k)!`, so `alpha = 0` needs no special case
//! and small `alpha * dt` loses no precision.

use crate::error::{ensure_finite, LabError, Result};

const SERIES_CUTOFF: f64 = 1.0;

fn phi_series(k: u32, y: f64) -> f64 {
    // term_n = y^n / (n + k)!
    let mut fact = 1.0;
    for i in 2..=k {
        fact *= i as f64;
    }
    let mut term = 1.0 / fact;
    let mut sum = term;
    for n in 1..40 {
        term *= y / (n + k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(e^y - 1) / y`, equal to 1 at 0.
pub fn phi1(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        phi_series(1, y)
    } else {
        y.exp_m1() / y
    }
}

/// `(e^y - 1 - y) / y^2`, equal to 1/2 at 0.
pub fn phi2(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        phi_series(2, y)
    } else {
        (y.exp_m1() - y) / (y * y)
    }
}

/// `(e^y - 1 - y - y^2/2) / y^3`, equal to 1/6 at 0.
pub fn phi3(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        phi_series(3, y)
    } else {
        (y.exp_m1() - y - 0.5 * y * y) / (y * y * y)
    }
}

/// Precomputed coefficients of one exact step of length `dt` at rate `alpha`.
///
/// With `m(s)`, `v(s)` the conditional mean and variance at offset `s`,
/// the expected running state cost over the step is
/// `E int_0^dt q^2 ds = c_xx x^2 + c_xd x d + c_dd d^2 + c_0`
/// for start `x` and constant drive `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuKernel {
    pub alpha: f64,
    pub dt: f64,
    pub growth: f64,
    pub drive_coef: f64,
    pub variance: f64,
    pub sd: f64,
    pub c_xx: f64,
    pub c_xd: f64,
    pub c_dd: f64,
    pub c_0: f64,
}

impl OuKernel {
    pub fn new(alpha: f64, dt: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("dt", dt)?;
        if dt < 0.0 {
            return Err(LabError::Domain(format!("dt must be >= 0, got {dt}")));
        }
        let y = alpha * dt;
        let growth = y.exp();
        let variance = dt * phi1(2.0 * y);
        let h2 = dt * dt;
        let kernel = OuKernel {
            alpha,
            dt,
            growth,
            drive_coef: dt * phi1(y),
            variance,
            sd: variance.sqrt(),
            c_xx: variance,
            c_xd: 2.0 * h2 * (2.0 * phi2(2.0 * y) - phi2(y)),
            c_dd: 2.0 * h2 * dt * (2.0 * phi3(2.0 * y) - phi3(y)),
            c_0: h2 * phi2(2.0 * y),
        };
        let all = [
            kernel.growth,
            kernel.drive_coef,
            kernel.variance,
            kernel.c_xd,
            kernel.c_dd,
            kernel.c_0,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Overflow(format!(
                "OU transition overflows for alpha={alpha}, dt={dt}"
            )));
        }
        Ok(kernel)
    }

    #[inline]
    pub fn mean(&self, q: f64, drive: f64) -> f64 {
        self.growth * q + drive * self.drive_coef
    }

    #[inline]
    pub fn step(&self, q: f64, drive: f64, z: f64) -> f64 {
        self.mean(q, drive) + self.sd * z
    }

    /// Expected `int q^2 ds` over the step, conditional on the start.
    #[inline]
    pub fn expected_state_cost(&self, q: f64, drive: f64) -> f64 {
        self.c_xx * q * q + self.c_xd * q * drive + self.c_dd * drive * drive + self.c_0
    }
}

/// Exact one-step transition moments `(mean, variance)`.
pub fn ou_step_moments(q: f64, alpha: f64, drive: f64, dt: f64) -> Result<(f64, f64)> {
    ensure_finite("q", q)?;
    ensure_finite("drive", drive)?;
    let k = OuKernel::new(alpha, dt)?;
    let mean = k.mean(q, drive);
    if !mean.is_finite() {
        return Err(LabError::Overflow(format!(
            "transition mean overflows (q={q}, alpha={alpha}, drive={drive}, dt={dt})"
        )));
    }
    Ok((mean, k.variance))
}

/// Sample the exact transition given a standard normal draw `z`.
pub fn ou_exact_step(q: f64, alpha: f64, drive: f64, dt: f64, z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    let (mean, var) = ou_step_moments(q, alpha, drive, dt)?;
    Ok(mean + var.sqrt() * z)
}

/// Single-entry cache; a path reuses the same `(alpha, dt)` for long runs.
#[derive(Debug, Default, Clone)]
pub(crate) struct KernelCache {
    last: Option<OuKernel>,
}

impl KernelCache {
    pub(crate) fn get(&mut self, alpha: f64, dt: f64) -> Result<OuKernel> {
        if let Some(k) = self.last {
            if k.alpha.to_bits() == alpha.to_bits() && k.dt.to_bits() == dt.to_bits() {
                return Ok(k);
            }
        }
        let k = OuKernel::new(alpha, dt)?;
        self.last = Some(k);
        Ok(k)
    }
}
