use super::mc::{estimate_expected_cost, CostEstimate, McConfig};
use crate::analytics::ecost_opt;
use crate::error::{LabError, Result};
use crate::sde::ProblemDynamics;
use crate::strategy::{
    make_constant_gain, make_optimal_known, BrParams, StrategyBlueprint,
};

/// Strategy family for a sweep; blueprints are built per `(a, b)` cell.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    ConstantGain { alpha: f64 },
    /// Optimal gain for a fixed assumed `beta`.
    OptimalAssumed { beta: f64 },
    /// Optimal gain for the true `b` of each cell.
    OptimalTrue,
    Br { big_a: Option<f64>, k_gain: Option<f64>, tau: Option<f64> },
}

impl StrategySpec {
    pub fn br() -> Self {
        StrategySpec::Br { big_a: None, k_gain: None, tau: None }
    }

    pub fn id(&self) -> String {
        match self {
            StrategySpec::ConstantGain { alpha } => format!("cg({alpha})"),
            StrategySpec::OptimalAssumed { beta } => format!("opt({beta})"),
            StrategySpec::OptimalTrue => "opt(b)".into(),
            StrategySpec::Br { .. } => "br".into(),
        }
    }

    pub fn build(&self, dynamics: &ProblemDynamics) -> Result<StrategyBlueprint> {
        let ProblemDynamics { a, b, q0, horizon } = *dynamics;
        match self {
            StrategySpec::ConstantGain { alpha } => make_constant_gain(*alpha),
            StrategySpec::OptimalAssumed { beta } => make_optimal_known(*beta, a, horizon),
            StrategySpec::OptimalTrue => make_optimal_known(b, a, horizon),
            StrategySpec::Br { big_a, k_gain, tau } => StrategyBlueprint::br(
                BrParams::with_constants(a, horizon, q0, *big_a, *k_gain, *tau)?,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretRow {
    pub a: f64,
    pub b: f64,
    pub strategy: String,
    pub mc_cost: CostEstimate,
    pub ecost_opt: f64,
    pub mreg: f64,
    pub mreg_stderr: f64,
    /// Empty, or `overflow` when a path left f64 range.
    pub flags: String,
}

/// One row per `(a, b, strategy)` in that nesting order. All cells share the
/// seed, so every strategy and every `b` at a given `a` sees the same noise.
pub fn regret_sweep(
    a_list: &[f64],
    b_grid: &[f64],
    strategies: &[StrategySpec],
    horizon: f64,
    q0: f64,
    mc: &McConfig,
) -> Result<Vec<RegretRow>> {
    regret_sweep_with(a_list, b_grid, strategies, horizon, q0, mc, |_| {})
}

/// [`regret_sweep`] with a callback invoked as each row completes.
pub fn regret_sweep_with<F: FnMut(&RegretRow)>(
    a_list: &[f64],
    b_grid: &[f64],
    strategies: &[StrategySpec],
    horizon: f64,
    q0: f64,
    mc: &McConfig,
    mut on_row: F,
) -> Result<Vec<RegretRow>> {
    mc.validate()?;
    let mut rows = Vec::with_capacity(a_list.len() * b_grid.len() * strategies.len());
    for &a in a_list {
        for &b in b_grid {
            let dynamics = ProblemDynamics::new(a, b, q0, horizon)?;
            let opt = ecost_opt(a, b, horizon, q0)?;
            if !(opt > 0.0) {
                return Err(LabError::Numeric(format!("optimal cost {opt} is not positive at a={a}, b={b}")));
            }
            for s in strategies {
                let bp = s.build(&dynamics)?;
                let (mc_cost, flags) = match estimate_expected_cost(&dynamics, &bp, mc) {
                    Ok(e) if e.mean.is_finite() => (e, String::new()),
                    Ok(e) => (CostEstimate::overflowed(e.n), "overflow".to_string()),
                    Err(e) if e.is_overflow() => {
                        let n = if mc.antithetic { mc.n_paths / 2 } else { mc.n_paths };
                        (CostEstimate::overflowed(n), "overflow".to_string())
                    }
                    Err(e) => return Err(e),
                };
                let row = RegretRow {
                    a,
                    b,
                    strategy: s.id(),
                    mreg: mc_cost.mean / opt,
                    mreg_stderr: mc_cost.stderr / opt,
                    mc_cost,
                    ecost_opt: opt,
                    flags,
                };
                on_row(&row);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub strategy: String,
    pub max_mreg: f64,
    pub argmax_a: f64,
    pub argmax_b: f64,
}

/// Per-strategy maximum regret over the rows, in order of first appearance.
/// The first row attaining the maximum wins ties; `+inf` propagates.
pub fn worst_case_regret(rows: &[RegretRow]) -> Result<Vec<WorstCase>> {
    if rows.is_empty() {
        return Err(LabError::Domain("no regret rows".into()));
    }
    let mut out: Vec<WorstCase> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|w| w.strategy == r.strategy) {
            Some(w) => {
                if r.mreg > w.max_mreg || (r.mreg.is_nan() && !w.max_mreg.is_nan()) {
                    w.max_mreg = r.mreg;
                    w.argmax_a = r.a;
                    w.argmax_b = r.b;
                }
            }
            None => out.push(WorstCase {
                strategy: r.strategy.clone(),
                max_mreg: r.mreg,
                argmax_a: r.a,
                argmax_b: r.b,
            }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(b: f64, mreg: f64) -> RegretRow {
        RegretRow {
            a: 0.0,
            b,
            strategy: "s".into(),
            mc_cost: CostEstimate::from_samples(&[1.0, 2.0]).unwrap(),
            ecost_opt: 1.0,
            mreg,
            mreg_stderr: 0.0,
            flags: String::new(),
        }
    }

    #[test]
    fn worst_case_examples() {
        assert_eq!(worst_case_regret(&[row(0.0, 1.0)]).unwrap()[0].max_mreg, 1.0);
        let w = worst_case_regret(&[row(1.0, 1.2), row(10.0, 3.4)]).unwrap();
        assert_eq!((w[0].max_mreg, w[0].argmax_b), (3.4, 10.0));
        let w = worst_case_regret(&[row(1.0, 1.2), row(10.0, f64::INFINITY), row(2.0, 5.0)]).unwrap();
        assert_eq!(w[0].max_mreg, f64::INFINITY);
        assert!(worst_case_regret(&[]).is_err());
    }

    #[test]
    fn ids() {
        assert_eq!(StrategySpec::ConstantGain { alpha: -1.0 }.id(), "cg(-1)");
        assert_eq!(StrategySpec::OptimalTrue.id(), "opt(b)");
        assert_eq!(StrategySpec::br().id(), "br");
    }
}
