//! Python bindings: analytic formulas, blueprints, path simulation and the
//! Monte Carlo estimators. Long computations release the GIL.

use aclab::analytics;
use aclab::experiments::{self, LemmaId, LemmaTrialSpec, McConfig, ProbEstimate, StrategySpec};
use aclab::sde::{self, NoiseSource, ProblemDynamics};
use aclab::strategy::{self, BrParams, StrategyBlueprint};
use aclab::LabError;
use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: LabError) -> PyErr {
    if e.is_overflow() {
        return PyOverflowError::new_err(e.to_string());
    }
    match e {
        LabError::Domain(_)
        | LabError::Hypothesis(_)
        | LabError::Schema(_)
        | LabError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for aclab::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn prob(p: ProbEstimate) -> (f64, f64, u64) {
    (p.p, p.stderr, p.n)
}

fn mc_config(n_paths: u64, seed: u64, dt_base: Option<f64>, dt_testing: Option<f64>) -> PyResult<McConfig> {
    let mut mc = McConfig::new(n_paths, seed).py_err()?;
    mc.dt_base = dt_base;
    mc.dt_testing = dt_testing;
    mc.validate().py_err()?;
    Ok(mc)
}

/// Parse `br`, `cg(<alpha>)`, `opt(b)` or `opt(<beta>)`.
fn parse_strategy(id: &str) -> PyResult<StrategySpec> {
    let id = id.trim();
    if id == "br" {
        return Ok(StrategySpec::br());
    }
    if id == "opt(b)" {
        return Ok(StrategySpec::OptimalTrue);
    }
    let inner = |prefix: &str| -> Option<PyResult<f64>> {
        let rest = id.strip_prefix(prefix)?.strip_suffix(')')?;
        Some(rest.trim().parse::<f64>().map_err(|e| PyValueError::new_err(format!("{id}: {e}"))))
    };
    if let Some(alpha) = inner("cg(") {
        return Ok(StrategySpec::ConstantGain { alpha: alpha? });
    }
    if let Some(beta) = inner("opt(") {
        return Ok(StrategySpec::OptimalAssumed { beta: beta? });
    }
    Err(PyValueError::new_err(format!("unknown strategy \"{id}\"")))
}

#[pyfunction]
fn kappa(t: f64, beta: f64, a: f64) -> PyResult<f64> {
    analytics::kappa(t, beta, a).py_err()
}

#[pyfunction]
#[pyo3(signature = (a, b, horizon = 1.0, q0 = 1.0))]
fn ecost_opt(a: f64, b: f64, horizon: f64, q0: f64) -> PyResult<f64> {
    analytics::ecost_opt(a, b, horizon, q0).py_err()
}

/// Expected cost of the constant gain `u = -alpha q`.
#[pyfunction]
#[pyo3(signature = (alpha, a, b, horizon = 1.0, q0 = 1.0))]
fn ecost_constant_gain(alpha: f64, a: f64, b: f64, horizon: f64, q0: f64) -> PyResult<f64> {
    let g = analytics::GainSchedule::constant(alpha, horizon).py_err()?;
    analytics::ecost_simple_feedback(&g, a, b, q0).py_err()
}

/// Expected cost of `u = -beta kappa(T - t, beta; a) q` when the true gain is `b`.
#[pyfunction]
#[pyo3(signature = (beta, a, b, horizon = 1.0, q0 = 1.0))]
fn ecost_assumed_optimal(beta: f64, a: f64, b: f64, horizon: f64, q0: f64) -> PyResult<f64> {
    let g = analytics::GainSchedule::optimal(beta, a, horizon).py_err()?;
    analytics::ecost_simple_feedback(&g, a, b, q0).py_err()
}

#[pyfunction]
#[pyo3(signature = (t, alpha, a, b, horizon = 1.0))]
fn phi(t: f64, alpha: f64, a: f64, b: f64, horizon: f64) -> PyResult<f64> {
    let g = analytics::GainSchedule::constant(alpha, horizon).py_err()?;
    analytics::phi(t, &g, a, b).py_err()
}

#[pyfunction]
#[pyo3(signature = (alpha, a, b, horizon = 1.0, q0 = 1.0))]
fn cg_cost_bound(alpha: f64, a: f64, b: f64, horizon: f64, q0: f64) -> PyResult<f64> {
    analytics::cg_cost_bound(alpha, a, b, horizon, q0).py_err()
}

/// Returns `(regime, bound)`.
#[pyfunction]
#[pyo3(signature = (a, b, c_t, horizon = 1.0, q0 = 1.0))]
fn opt_lower_bound(a: f64, b: f64, c_t: f64, horizon: f64, q0: f64) -> PyResult<(&'static str, f64)> {
    let (r, v) = analytics::opt_lower_bound(a, b, horizon, q0, c_t).py_err()?;
    Ok((r.as_str(), v))
}

#[pyfunction]
fn x_process_moments(alpha: f64, beta_drift: f64, t: f64) -> PyResult<(f64, f64)> {
    analytics::x_process_moments(alpha, beta_drift, t).py_err()
}

#[pyfunction]
fn reflection_sup_prob(alpha: f64, t: f64, level: f64) -> PyResult<f64> {
    analytics::reflection_sup_prob(alpha, t, level).py_err()
}

#[pyfunction]
fn ou_step_moments(q: f64, alpha: f64, drive: f64, dt: f64) -> PyResult<(f64, f64)> {
    sde::ou_step_moments(q, alpha, drive, dt).py_err()
}

#[pyfunction]
fn ou_exact_step(q: f64, alpha: f64, drive: f64, dt: f64, z: f64) -> PyResult<f64> {
    sde::ou_exact_step(q, alpha, drive, dt, z).py_err()
}

/// Strategy description; build with the static constructors.
#[pyclass(name = "Blueprint", frozen)]
struct PyBlueprint {
    inner: StrategyBlueprint,
}

#[pymethods]
impl PyBlueprint {
    #[staticmethod]
    fn constant_gain(alpha: f64) -> PyResult<Self> {
        Ok(PyBlueprint { inner: strategy::make_constant_gain(alpha).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (beta, a, horizon = 1.0))]
    fn optimal_known(beta: f64, a: f64, horizon: f64) -> PyResult<Self> {
        Ok(PyBlueprint { inner: strategy::make_optimal_known(beta, a, horizon).py_err()? })
    }

    #[staticmethod]
    #[pyo3(signature = (a, horizon = 1.0, q0 = 1.0, big_a = None, k_gain = None, tau = None))]
    fn br(
        a: f64,
        horizon: f64,
        q0: f64,
        big_a: Option<f64>,
        k_gain: Option<f64>,
        tau: Option<f64>,
    ) -> PyResult<Self> {
        let p = BrParams::with_constants(a, horizon, q0, big_a, k_gain, tau).py_err()?;
        Ok(PyBlueprint { inner: StrategyBlueprint::br(p).py_err()? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyBlueprint { inner: StrategyBlueprint::from_json(text).py_err()? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    /// Controls a fresh controller issues along a recorded history.
    #[pyo3(signature = (times, positions, horizon = 1.0))]
    fn replay(&self, times: Vec<f64>, positions: Vec<f64>, horizon: f64) -> PyResult<Vec<f64>> {
        strategy::replay(&self.inner, horizon, &times, &positions).py_err()
    }

    fn __repr__(&self) -> String {
        format!("Blueprint({})", self.inner.to_json())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Simulate one path; returns a dict with `t`, `q`, `u`, `cost` and `events`.
#[pyfunction]
#[pyo3(signature = (blueprint, a, b, q0 = 1.0, horizon = 1.0, seed = 0, path = 0, dt_base = None, dt_testing = None, zero_noise = false))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    blueprint: &PyBlueprint,
    a: f64,
    b: f64,
    q0: f64,
    horizon: f64,
    seed: u64,
    path: u64,
    dt_base: Option<f64>,
    dt_testing: Option<f64>,
    zero_noise: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let d = ProblemDynamics::new(a, b, q0, horizon).py_err()?;
    let mut grid = sde::SimGrid::default_for(horizon, &blueprint.inner).py_err()?;
    if let Some(h) = dt_base {
        grid.dt_base = h;
    }
    if let Some(h) = dt_testing {
        grid.dt_testing = h;
    }
    let noise = if zero_noise { NoiseSource::zero() } else { NoiseSource::new(seed, path) };
    let bp = &blueprint.inner;
    let log = py.detach(|| sde::simulate_controlled_path(&d, bp, &grid, noise)).py_err()?;
    let out = PyDict::new(py);
    out.set_item("t", log.times)?;
    out.set_item("q", log.positions)?;
    out.set_item("u", log.controls)?;
    out.set_item("segment_costs", log.segment_costs)?;
    out.set_item("cost", log.cost)?;
    let events: Vec<(f64, String)> = log.events.into_iter().map(|e| (e.time, e.tag)).collect();
    out.set_item("events", events)?;
    Ok(out)
}

/// Returns `(mean, stderr, n)`.
#[pyfunction]
#[pyo3(signature = (blueprint, a, b, q0 = 1.0, horizon = 1.0, n_paths = 10_000, seed = 42, dt_base = None, dt_testing = None))]
#[allow(clippy::too_many_arguments)]
fn estimate_expected_cost(
    py: Python<'_>,
    blueprint: &PyBlueprint,
    a: f64,
    b: f64,
    q0: f64,
    horizon: f64,
    n_paths: u64,
    seed: u64,
    dt_base: Option<f64>,
    dt_testing: Option<f64>,
) -> PyResult<(f64, f64, u64)> {
    let d = ProblemDynamics::new(a, b, q0, horizon).py_err()?;
    let mc = mc_config(n_paths, seed, dt_base, dt_testing)?;
    let bp = &blueprint.inner;
    let e = py.detach(|| experiments::estimate_expected_cost(&d, bp, &mc)).py_err()?;
    Ok((e.mean, e.stderr, e.n))
}

/// One dict per `(a, b, strategy)` cell. Strategies are ids such as
/// `"br"`, `"cg(1)"`, `"opt(b)"` or `"opt(0.5)"`.
#[pyfunction]
#[pyo3(signature = (a_list, b_grid, strategies, horizon = 1.0, q0 = 1.0, n_paths = 10_000, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn regret_sweep<'py>(
    py: Python<'py>,
    a_list: Vec<f64>,
    b_grid: Vec<f64>,
    strategies: Vec<String>,
    horizon: f64,
    q0: f64,
    n_paths: u64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let specs = strategies.iter().map(|s| parse_strategy(s)).collect::<PyResult<Vec<_>>>()?;
    let mc = mc_config(n_paths, seed, None, None)?;
    let rows = py
        .detach(|| experiments::regret_sweep(&a_list, &b_grid, &specs, horizon, q0, &mc))
        .py_err()?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("a", r.a)?;
            d.set_item("b", r.b)?;
            d.set_item("strategy", r.strategy)?;
            d.set_item("mean_cost", r.mc_cost.mean)?;
            d.set_item("stderr", r.mc_cost.stderr)?;
            d.set_item("ecost_opt", r.ecost_opt)?;
            d.set_item("mreg", r.mreg)?;
            d.set_item("mreg_stderr", r.mreg_stderr)?;
            d.set_item("flags", r.flags)?;
            Ok(d)
        })
        .collect()
}

/// Band trials return `((p_stay, se, n), (p_exit, se, n))`; hitting cases
/// return `(p, se, n)`.
#[pyfunction]
#[pyo3(signature = (lemma, alpha, q0 = 1.0, beta = 0.0, tau = None, eta = 0.5, t_hat = 1.0, n_paths = 10_000, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn estimate_lemma(
    py: Python<'_>,
    lemma: &str,
    alpha: f64,
    q0: f64,
    beta: f64,
    tau: Option<f64>,
    eta: f64,
    t_hat: f64,
    n_paths: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let id: LemmaId = lemma.parse().py_err()?;
    let mut spec = LemmaTrialSpec::new(id, q0, alpha, mc_config(n_paths, seed, None, None)?);
    spec.beta = beta;
    spec.tau = tau;
    spec.eta = eta;
    spec.t_hat = t_hat;
    if id.is_bkpl() {
        let (stay, exit) = py.detach(|| experiments::estimate_lemma_bkpl(&spec)).py_err()?;
        Ok((prob(stay), prob(exit)).into_pyobject(py)?.into_any().unbind())
    } else {
        let p = py.detach(|| experiments::estimate_lemma_nhl(&spec)).py_err()?;
        Ok(prob(p).into_pyobject(py)?.into_any().unbind())
    }
}

#[pyfunction]
#[pyo3(signature = (alpha, t, level, dt = 1e-3, n_paths = 10_000, seed = 42))]
fn estimate_sup_crossing(
    py: Python<'_>,
    alpha: f64,
    t: f64,
    level: f64,
    dt: f64,
    n_paths: u64,
    seed: u64,
) -> PyResult<(f64, f64, u64)> {
    let mc = mc_config(n_paths, seed, None, None)?;
    let p = py.detach(|| experiments::estimate_sup_crossing(alpha, t, level, dt, &mc)).py_err()?;
    Ok(prob(p))
}

/// Run a JSON config file like the command-line tool; returns the written paths.
#[pyfunction]
#[pyo3(signature = (config, out = None, seed = None, threads = None))]
fn run_config_file(
    py: Python<'_>,
    config: std::path::PathBuf,
    out: Option<std::path::PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> PyResult<Vec<String>> {
    let opts = aclab::cli::RunOptions { config, out, threads, seed, quiet: true };
    let report = py.detach(|| aclab::cli::run(&opts)).map_err(|e| match e {
        aclab::cli::RunError::Lab(l) => to_py(l),
        other => PyRuntimeError::new_err(other.to_string()),
    })?;
    Ok(report.files.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
#[pyo3(name = "aclab")]
fn aclab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBlueprint>()?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(ecost_opt, m)?)?;
    m.add_function(wrap_pyfunction!(ecost_constant_gain, m)?)?;
    m.add_function(wrap_pyfunction!(ecost_assumed_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(cg_cost_bound, m)?)?;
    m.add_function(wrap_pyfunction!(opt_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(x_process_moments, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_sup_prob, m)?)?;
    m.add_function(wrap_pyfunction!(ou_step_moments, m)?)?;
    m.add_function(wrap_pyfunction!(ou_exact_step, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_expected_cost, m)?)?;
    m.add_function(wrap_pyfunction!(regret_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_sup_crossing, m)?)?;
    m.add_function(wrap_pyfunction!(run_config_file, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_ids_parse() {
        assert_eq!(parse_strategy("br").unwrap(), StrategySpec::br());
        assert_eq!(parse_strategy("opt(b)").unwrap(), StrategySpec::OptimalTrue);
        assert_eq!(parse_strategy("cg(-1)").unwrap(), StrategySpec::ConstantGain { alpha: -1.0 });
        assert_eq!(parse_strategy(" opt(0.5) ").unwrap(), StrategySpec::OptimalAssumed { beta: 0.5 });
    }
}
