//! Monte Carlo frequencies of the hitting events that drive the epoch strategy.

use super::mc::{path_values, CostEstimate, McConfig};
use crate::error::{ensure_finite, LabError, Result};
use crate::sde::{NoiseSource, OuKernel};
use crate::strategy::default_tau;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaId {
    /// Drifted OU on `[0, tau]` with large `|beta|`: leaving the band is likely.
    BkplA,
    /// Same with tiny `|beta|`: staying in the band is likely.
    BkplB,
    /// `alpha > 0`: `q < 2 Q0` on `[0, 1/(eta alpha)]`.
    NhlAi,
    /// `alpha > 0`: `q <= Q0/2` somewhere on `[0, T_hat]`.
    NhlAii,
    /// `alpha < 0`: `q > Q0/2` on `[0, 1/(eta |alpha|)]`.
    NhlBi,
    /// `alpha < 0`: `|q| >= 2 Q0` somewhere on `[0, T_hat]`.
    NhlBiii,
    /// `alpha != 0`: `q >= 2 Q0` or `q <= Q0/2` somewhere on `[0, eta/|alpha|]`.
    NhlC,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::BkplA,
        LemmaId::BkplB,
        LemmaId::NhlAi,
        LemmaId::NhlAii,
        LemmaId::NhlBi,
        LemmaId::NhlBiii,
        LemmaId::NhlC,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaId::BkplA => "bkpl-A",
            LemmaId::BkplB => "bkpl-B",
            LemmaId::NhlAi => "nhl-Ai",
            LemmaId::NhlAii => "nhl-Aii",
            LemmaId::NhlBi => "nhl-Bi",
            LemmaId::NhlBiii => "nhl-Biii",
            LemmaId::NhlC => "nhl-C",
        }
    }

    pub fn is_bkpl(&self) -> bool {
        matches!(self, LemmaId::BkplA | LemmaId::BkplB)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| LabError::Config(format!("unknown lemma \"{s}\"")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaTrialSpec {
    pub lemma: LemmaId,
    pub q0: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Band duration for the drifted trial; `None` takes the default testing duration.
    pub tau: Option<f64>,
    pub eta: f64,
    pub t_hat: f64,
    pub mc: McConfig,
}

impl LemmaTrialSpec {
    /// `beta = 0`, default `tau`, `eta = 0.5`, `T_hat = 1`.
    pub fn new(lemma: LemmaId, q0: f64, alpha: f64, mc: McConfig) -> Self {
        LemmaTrialSpec { lemma, q0, alpha, beta: 0.0, tau: None, eta: 0.5, t_hat: 1.0, mc }
    }

    /// Largest admissible band duration for the drifted trial.
    pub fn tau_rule(&self) -> f64 {
        default_tau(self.alpha, (self.alpha * self.t_hat).floor() as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEstimate {
    pub p: f64,
    pub stderr: f64,
    pub n: u64,
}

impl From<CostEstimate> for ProbEstimate {
    fn from(e: CostEstimate) -> Self {
        ProbEstimate { p: e.mean, stderr: e.stderr, n: e.n }
    }
}

fn indicator(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

/// Steps of the drifted band trial.
pub const BAND_STEPS: u32 = 512;

/// `dq = (alpha q + beta Q0 (alpha tau)^{-1/2}) dt + dW` from `Q0` on `[0, tau]`,
/// stopped when `|q - Q0| >= |Q0| (alpha tau)^{1/2}` at a grid point in `(0, tau]`.
/// Returns `(P[no stop], P[stop])`.
pub fn estimate_lemma_bkpl(spec: &LemmaTrialSpec) -> Result<(ProbEstimate, ProbEstimate)> {
    if !spec.lemma.is_bkpl() {
        return Err(LabError::Domain(format!("{} is not a band trial", spec.lemma)));
    }
    for (n, x) in [("Q0", spec.q0), ("alpha", spec.alpha), ("beta", spec.beta), ("T_hat", spec.t_hat)] {
        ensure_finite(n, x)?;
    }
    if !(spec.alpha > 0.0) {
        return Err(LabError::Hypothesis(format!("band trial needs alpha > 0, got {}", spec.alpha)));
    }
    if spec.q0 == 0.0 {
        return Err(LabError::Hypothesis("band trial needs Q0 != 0".into()));
    }
    if !(spec.t_hat > 0.0) {
        return Err(LabError::Domain(format!("T_hat must be > 0, got {}", spec.t_hat)));
    }
    let rule = spec.tau_rule();
    let tau = spec.tau.unwrap_or(rule);
    ensure_finite("tau", tau)?;
    if !(tau > 0.0 && tau <= rule) {
        return Err(LabError::Hypothesis(format!(
            "tau={tau} must lie in (0, {rule}] for alpha={}",
            spec.alpha
        )));
    }
    let s = (spec.alpha * tau).sqrt();
    let drive = spec.beta * spec.q0 / s;
    let band = spec.q0.abs() * s;
    let k = OuKernel::new(spec.alpha, tau / BAND_STEPS as f64)?;
    let q0 = spec.q0;
    let values = path_values(&spec.mc, |mut noise: NoiseSource| {
        let mut q = q0;
        for _ in 0..BAND_STEPS {
            q = k.step(q, drive, noise.next_normal());
            if (q - q0).abs() >= band {
                return Ok(1.0);
            }
        }
        Ok(0.0)
    })?;
    let exit = CostEstimate::from_samples(&values)?;
    let stay = ProbEstimate { p: 1.0 - exit.mean, stderr: exit.stderr, n: exit.n };
    Ok((stay, exit.into()))
}

#[derive(Debug, Clone, Copy)]
enum Watch {
    /// Event holds unless the path leaves; value 1 if never left.
    StayBelow(f64),
    StayAbove(f64),
    /// Event holds once the path reaches.
    ReachBelow(f64),
    ReachAbsAbove(f64),
    ReachOutside(f64, f64),
}

/// Horizon used by an uncontrolled-OU case.
pub fn nhl_horizon(spec: &LemmaTrialSpec) -> Result<f64> {
    let a = spec.alpha.abs();
    Ok(match spec.lemma {
        LemmaId::NhlAi | LemmaId::NhlBi => 1.0 / (spec.eta * a),
        LemmaId::NhlAii | LemmaId::NhlBiii => spec.t_hat,
        LemmaId::NhlC => spec.eta / a,
        l => return Err(LabError::Domain(format!("{l} is not an uncontrolled-OU case"))),
    })
}

/// Frequency of the case's event for `dq = alpha q dt + dW` from `|Q0|`.
/// Events are checked at grid points; the grid has `max(512, ceil(H / dt_base))`
/// steps on the case horizon `H`, with `dt_base` defaulting to `T_hat / 2000`.
pub fn estimate_lemma_nhl(spec: &LemmaTrialSpec) -> Result<ProbEstimate> {
    for (n, x) in [("Q0", spec.q0), ("alpha", spec.alpha), ("eta", spec.eta), ("T_hat", spec.t_hat)] {
        ensure_finite(n, x)?;
    }
    if spec.q0 == 0.0 {
        return Err(LabError::Hypothesis("needs Q0 != 0".into()));
    }
    if !(spec.eta > 0.0 && spec.eta < 1.0 / std::f64::consts::LN_2) {
        return Err(LabError::Hypothesis(format!("eta={} outside (0, 1/ln 2)", spec.eta)));
    }
    if !(spec.t_hat > 0.0) {
        return Err(LabError::Domain(format!("T_hat must be > 0, got {}", spec.t_hat)));
    }
    let ok_sign = match spec.lemma {
        LemmaId::NhlAi | LemmaId::NhlAii => spec.alpha > 0.0,
        LemmaId::NhlBi | LemmaId::NhlBiii => spec.alpha < 0.0,
        LemmaId::NhlC => spec.alpha != 0.0,
        l => return Err(LabError::Domain(format!("{l} is not an uncontrolled-OU case"))),
    };
    if !ok_sign {
        return Err(LabError::Hypothesis(format!(
            "{} does not allow alpha={}",
            spec.lemma, spec.alpha
        )));
    }
    let q0 = spec.q0.abs();
    let watch = match spec.lemma {
        LemmaId::NhlAi => Watch::StayBelow(2.0 * q0),
        LemmaId::NhlAii => Watch::ReachBelow(0.5 * q0),
        LemmaId::NhlBi => Watch::StayAbove(0.5 * q0),
        LemmaId::NhlBiii => Watch::ReachAbsAbove(2.0 * q0),
        _ => Watch::ReachOutside(0.5 * q0, 2.0 * q0),
    };
    let horizon = nhl_horizon(spec)?;
    let dt_base = spec.mc.dt_base.unwrap_or(spec.t_hat / 2000.0);
    let steps = 512u64.max((horizon / dt_base).ceil() as u64);
    let k = OuKernel::new(spec.alpha, horizon / steps as f64)?;
    let values = path_values(&spec.mc, |mut noise: NoiseSource| {
        let mut q = q0;
        for _ in 0..steps {
            q = k.step(q, 0.0, noise.next_normal());
            let decided = match watch {
                Watch::StayBelow(h) if q >= h => Some(false),
                Watch::StayAbove(l) if q <= l => Some(false),
                Watch::ReachBelow(l) if q <= l => Some(true),
                Watch::ReachAbsAbove(h) if q.abs() >= h => Some(true),
                Watch::ReachOutside(l, h) if q <= l || q >= h => Some(true),
                _ => None,
            };
            if let Some(v) = decided {
                return Ok(indicator(v));
            }
        }
        Ok(indicator(matches!(watch, Watch::StayBelow(_) | Watch::StayAbove(_))))
    })?;
    Ok(CostEstimate::from_samples(&values)?.into())
}

/// Frequency of `max_k X(s_k) >= level` for `X(s) = int_0^s e^{-alpha r} dW(r)`
/// sampled exactly on a uniform grid of step close to `dt` over `[0, t]`.
pub fn estimate_sup_crossing(alpha: f64, t: f64, level: f64, dt: f64, mc: &McConfig) -> Result<ProbEstimate> {
    for (n, x) in [("alpha", alpha), ("t", t), ("level", level), ("dt", dt)] {
        ensure_finite(n, x)?;
    }
    if !(t > 0.0 && dt > 0.0 && level > 0.0) {
        return Err(LabError::Domain("need t, dt, level > 0".into()));
    }
    let steps = (t / dt).round().max(1.0) as u64;
    let h = t / steps as f64;
    // Var of the increment over [s, s + h] is e^{-2 alpha s} h phi1(-2 alpha h).
    let base_sd = OuKernel::new(-alpha, h)?.sd;
    let shrink = (-alpha * h).exp();
    let values = path_values(mc, |mut noise: NoiseSource| {
        let mut x = 0.0;
        let mut sd = base_sd;
        for _ in 0..steps {
            x += sd * noise.next_normal();
            if x >= level {
                return Ok(1.0);
            }
            sd *= shrink;
        }
        Ok(0.0)
    })?;
    Ok(CostEstimate::from_samples(&values)?.into())
}
