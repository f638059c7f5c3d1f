use super::noise::NoiseSource;
use super::ou::KernelCache;
use crate::error::{ensure_finite, LabError, Result};
use crate::strategy::{BlueprintKind, ControlLaw, Regime, StrategyBlueprint};
use std::fmt::Write as _;
use std::io::Write;

/// `dq = (a q + b u) dt + dW`, `q(0) = q0` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDynamics {
    pub a: f64,
    pub b: f64,
    pub q0: f64,
    pub horizon: f64,
}

impl ProblemDynamics {
    pub fn new(a: f64, b: f64, q0: f64, horizon: f64) -> Result<Self> {
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        ensure_finite("q0", q0)?;
        ensure_finite("T", horizon)?;
        if horizon <= 0.0 {
            return Err(LabError::Domain(format!("T must be > 0, got {horizon}")));
        }
        Ok(ProblemDynamics { a, b, q0, horizon })
    }
}

/// Step sizes for one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    pub dt_base: f64,
    /// Used while the controller asks for fine steps.
    pub dt_testing: f64,
    pub t_end: f64,
    /// Largest `rate * dt` allowed for an unstable closed loop, so that
    /// threshold crossings are not overshot by many orders of magnitude.
    pub growth_cap: f64,
    pub max_steps: u64,
}

pub const DEFAULT_GROWTH_CAP: f64 = 0.01;
pub const DEFAULT_MAX_STEPS: u64 = 50_000_000;

impl SimGrid {
    pub fn new(dt_base: f64, dt_testing: f64, t_end: f64) -> Result<Self> {
        let g = SimGrid {
            dt_base,
            dt_testing,
            t_end,
            growth_cap: DEFAULT_GROWTH_CAP,
            max_steps: DEFAULT_MAX_STEPS,
        };
        g.validate()?;
        Ok(g)
    }

    /// `dt_base = T / 2000`; `dt_testing = tau / 64` for the large-a epoch strategy.
    pub fn default_for(horizon: f64, bp: &StrategyBlueprint) -> Result<Self> {
        let dt_base = horizon / 2000.0;
        let dt_testing = match &bp.kind {
            BlueprintKind::Br(p) if p.regime == Regime::LargeA => (p.tau / 64.0).min(dt_base),
            _ => dt_base,
        };
        Self::new(dt_base, dt_testing, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, x) in [
            ("dt_base", self.dt_base),
            ("dt_testing", self.dt_testing),
            ("t_end", self.t_end),
            ("growth_cap", self.growth_cap),
        ] {
            ensure_finite(n, x)?;
        }
        if !(0.0 < self.dt_testing && self.dt_testing <= self.dt_base && self.dt_base <= self.t_end) {
            return Err(LabError::Grid(format!(
                "need 0 < dt_testing <= dt_base <= T, got {} / {} / {}",
                self.dt_testing, self.dt_base, self.t_end
            )));
        }
        if !(self.growth_cap > 0.0) {
            return Err(LabError::Grid("growth_cap must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub tag: String,
}

/// One simulated path.
///
/// `segment_costs[i]` is the running cost attributed to `[times[i], times[i+1]]`.
/// For simulated paths it is the exact conditional expectation of
/// `int (q^2 + u^2) ds` over the step given the state at its start, which has the
/// same expectation as the realized cost and no discretization error.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// Control at the start of each step.
    pub controls: Vec<f64>,
    pub segment_costs: Vec<f64>,
    pub cost: f64,
    pub events: Vec<TrajectoryEvent>,
}

fn ordered_sum(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |acc, x| acc + x)
}

impl TrajectoryLog {
    /// Log from sampled `(t, q, u)` with left-endpoint rectangle costs.
    pub fn from_samples(times: Vec<f64>, positions: Vec<f64>, controls: Vec<f64>) -> Result<Self> {
        if times.len() != positions.len() || controls.len() + 1 != times.len() {
            return Err(LabError::Schema(format!(
                "expected n+1 times and positions and n controls, got {}/{}/{}",
                times.len(),
                positions.len(),
                controls.len()
            )));
        }
        let segment_costs: Vec<f64> = (0..controls.len())
            .map(|i| {
                let (q, u) = (positions[i], controls[i]);
                (q * q + u * u) * (times[i + 1] - times[i])
            })
            .collect();
        let cost = ordered_sum(&segment_costs);
        Ok(TrajectoryLog { times, positions, controls, segment_costs, cost, events: Vec::new() })
    }

    pub fn n_steps(&self) -> usize {
        self.controls.len()
    }

    /// CSV with header `t,q,u,event`. The control column repeats the last
    /// held value at the final time.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,q,u,event")?;
        let mut ev = self.events.iter().peekable();
        let mut line = String::new();
        for (i, (&t, &q)) in self.times.iter().zip(&self.positions).enumerate() {
            let u = self.controls.get(i).or(self.controls.last()).copied().unwrap_or(0.0);
            let mut tags = Vec::new();
            while let Some(e) = ev.peek() {
                if e.time <= t {
                    tags.push(e.tag.as_str());
                    ev.next();
                } else {
                    break;
                }
            }
            line.clear();
            let _ = write!(line, "{},{},{},{}", fmt_f64(t), fmt_f64(q), fmt_f64(u), tags.join(";"));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Validate the log and return its cost, recomputed as the ordered sum of the
/// segment costs.
pub fn accumulate_cost(log: &TrajectoryLog) -> Result<f64> {
    let n = log.controls.len();
    if log.times.len() != n + 1 || log.positions.len() != n + 1 || log.segment_costs.len() != n {
        return Err(LabError::Schema(format!(
            "ragged trajectory: {} times, {} positions, {} controls, {} segment costs",
            log.times.len(),
            log.positions.len(),
            n,
            log.segment_costs.len()
        )));
    }
    let c = ordered_sum(&log.segment_costs);
    if c.to_bits() != log.cost.to_bits() {
        return Err(LabError::InternalState(format!(
            "stored cost {} differs from recomputed {c}",
            log.cost
        )));
    }
    Ok(c)
}

/// Simulate one path. The controller sees `(t, q)` only; `b` enters the
/// transition law and the step-size cap, never the controller.
pub fn simulate_controlled_path(
    dynamics: &ProblemDynamics,
    blueprint: &StrategyBlueprint,
    grid: &SimGrid,
    mut noise: NoiseSource,
) -> Result<TrajectoryLog> {
    grid.validate()?;
    let big_t = dynamics.horizon;
    if grid.t_end != big_t {
        return Err(LabError::Grid(format!("grid horizon {} != T {}", grid.t_end, big_t)));
    }
    if let Some(p) = blueprint.br_params() {
        if p.a != dynamics.a || p.q0 != dynamics.q0 {
            return Err(LabError::Domain(format!(
                "epoch blueprint built for (a={}, q0={}), simulated with (a={}, q0={})",
                p.a, p.q0, dynamics.a, dynamics.q0
            )));
        }
    }
    let mut controller = blueprint.instantiate(big_t)?;
    let (a, b) = (dynamics.a, dynamics.b);
    let deterministic = noise.is_zero();
    let min_step = 1e-12 * big_t;

    let cap = (big_t / grid.dt_base).ceil() as usize + 2;
    let mut times = Vec::with_capacity(cap);
    let mut positions = Vec::with_capacity(cap);
    let mut controls = Vec::with_capacity(cap);
    let mut segment_costs = Vec::with_capacity(cap);
    let mut events = Vec::new();
    let mut cache = KernelCache::default();

    let mut t = 0.0;
    let mut q = dynamics.q0;
    times.push(t);
    positions.push(q);
    let mut steps: u64 = 0;

    while t < big_t {
        let d = controller.decide(t, q)?;
        let (alpha, drive, gain2, held) = match d.law {
            ControlLaw::Feedback { gain } => (a + b * gain, 0.0, gain * gain, 0.0),
            ControlLaw::Hold { u } => (a, b * u, 0.0, u),
        };
        let mut h = if d.fine_step { grid.dt_testing } else { grid.dt_base };
        if alpha > 0.0 && alpha * h > grid.growth_cap {
            h = grid.growth_cap / alpha;
        }
        let limit = if d.next_deadline > t && d.next_deadline < big_t { d.next_deadline } else { big_t };
        let snap = limit - t <= h * (1.0 + 1e-6);
        if snap {
            h = limit - t;
            if h < min_step {
                return Err(LabError::Grid(format!(
                    "step {h} to deadline {limit} at t={t} is below 1e-12 T"
                )));
            }
        }
        steps += 1;
        if steps > grid.max_steps {
            return Err(LabError::Grid(format!(
                "more than {} steps; closed-loop rate {alpha} at t={t}",
                grid.max_steps
            )));
        }
        let k = cache.get(alpha, h)?;
        let z = noise.next_normal();
        let state_cost = k.c_xx * q * q
            + k.c_xd * q * drive
            + k.c_dd * drive * drive
            + if deterministic { 0.0 } else { k.c_0 };
        let seg = (1.0 + gain2) * state_cost + held * held * h;
        let q_next = k.step(q, drive, z);
        let t_next = if snap { limit } else { t + h };
        if !q_next.is_finite() || !seg.is_finite() {
            return Err(LabError::Overflow(format!(
                "state or cost left f64 range at t={t_next} (q={q_next}, segment cost={seg})"
            )));
        }
        controls.push(d.u);
        segment_costs.push(seg);
        t = t_next;
        q = q_next;
        times.push(t);
        positions.push(q);
        if let Some(tag) = controller.observe(t, q)? {
            events.push(TrajectoryEvent { time: t, tag });
        }
    }
    let cost = ordered_sum(&segment_costs);
    if !cost.is_finite() {
        return Err(LabError::Overflow(format!("path cost {cost} is not finite")));
    }
    Ok(TrajectoryLog { times, positions, controls, segment_costs, cost, events })
}
