use super::config::{Command, Format, RunConfig};
use super::output::{
    json_f64, lemma_csv, lemma_summary, regret_csv, regret_summary, write_json, write_text,
    write_trajectory, LemmaRow,
};
use crate::error::LabError;
use crate::experiments::{
    estimate_lemma_bkpl, estimate_lemma_nhl, regret_sweep_with, LemmaId, LemmaTrialSpec, McConfig,
    StrategySpec,
};
use crate::sde::{simulate_controlled_path, ProblemDynamics, TrajectoryLog};
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Options of `aclab run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    /// Suppress the per-cell progress lines on stderr.
    pub quiet: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for configuration problems, 3 for numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 1,
            RunError::Lab(e) => match e {
                LabError::Config(_) | LabError::Schema(_) | LabError::Hypothesis(_) | LabError::Domain(_) => 2,
                _ => 3,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Files written by one run, in write order.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub seed: u64,
}

/// Read the config, apply flag overrides and run it.
pub fn run(opts: &RunOptions) -> Result<RunReport, RunError> {
    let text = std::fs::read_to_string(&opts.config).map_err(|e| {
        LabError::Config(format!("cannot read {}: {e}", opts.config.display()))
    })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(s) = opts.seed {
        cfg.mc.seed = s;
    }
    let out_dir = opts.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let threads = opts.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_config(&cfg, &out_dir, opts.quiet))
}

/// Run a parsed config, writing into `out_dir`.
pub fn run_config(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<RunReport, RunError> {
    cfg.check()?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut report = RunReport { files: Vec::new(), seed: cfg.mc.seed };
    match cfg.command {
        Command::Simulate => simulate(cfg, out_dir, &mut report)?,
        Command::Sweep => sweep(cfg, &cfg.strategy_specs()?, out_dir, quiet, &mut report)?,
        Command::Baselines => {
            let specs = vec![
                StrategySpec::br(),
                StrategySpec::ConstantGain { alpha: 0.0 },
                StrategySpec::ConstantGain { alpha: 1.0 },
                StrategySpec::ConstantGain { alpha: -1.0 },
                StrategySpec::OptimalTrue,
            ];
            sweep(cfg, &specs, out_dir, quiet, &mut report)?
        }
        Command::VerifyLemma => verify_lemma(cfg, out_dir, quiet, &mut report)?,
    }
    Ok(report)
}

fn emit_text(report: &mut RunReport, path: PathBuf, text: &str) -> Result<(), RunError> {
    write_text(&path, text).map_err(io_err(&path))?;
    report.files.push(path);
    Ok(())
}

fn emit_json(report: &mut RunReport, path: PathBuf, v: &serde_json::Value) -> Result<(), RunError> {
    write_json(&path, v).map_err(io_err(&path))?;
    report.files.push(path);
    Ok(())
}

fn simulate(cfg: &RunConfig, out_dir: &Path, report: &mut RunReport) -> Result<(), RunError> {
    let d = cfg.dynamics()?;
    let dynamics = ProblemDynamics::new(d.a.values()[0], d.b.values()?[0], d.q0, d.horizon)?;
    let bp = cfg.strategies[0].to_spec()?.build(&dynamics)?;
    let mc: McConfig = cfg.mc.raw();
    let grid = mc.grid_for(dynamics.horizon, &bp)?;
    let results: Vec<Result<TrajectoryLog, LabError>> = (0..mc.n_paths)
        .into_par_iter()
        .map(|i| simulate_controlled_path(&dynamics, &bp, &grid, mc.noise(i)))
        .collect();
    let mut logs = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        logs.push(r.map_err(|e| LabError::Path { path: i as u64, seed: mc.seed, source: Box::new(e) })?);
    }
    if cfg.output.wants(Format::Csv) {
        for (i, log) in logs.iter().enumerate() {
            let path = out_dir.join(format!("trajectory_{i}.csv"));
            write_trajectory(&path, log).map_err(io_err(&path))?;
            report.files.push(path);
        }
    }
    if cfg.output.wants(Format::Json) {
        let paths: Vec<_> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| {
                json!({
                    "path": i,
                    "cost": json_f64(l.cost),
                    "steps": l.n_steps(),
                    "events": l.events.iter().map(|e| json!({"t": json_f64(e.time), "tag": e.tag})).collect::<Vec<_>>(),
                })
            })
            .collect();
        let v = json!({
            "strategy": serde_json::from_str::<serde_json::Value>(&bp.to_json()).expect("valid json"),
            "a": json_f64(dynamics.a),
            "b": json_f64(dynamics.b),
            "T": json_f64(dynamics.horizon),
            "q0": json_f64(dynamics.q0),
            "seed": mc.seed,
            "paths": paths,
        });
        emit_json(report, out_dir.join("simulate_summary.json"), &v)?;
    }
    Ok(())
}

fn sweep(
    cfg: &RunConfig,
    specs: &[StrategySpec],
    out_dir: &Path,
    quiet: bool,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let d = cfg.dynamics()?;
    let mc = cfg.mc.to_mc()?;
    let rows = regret_sweep_with(&d.a.values(), &d.b.values()?, specs, d.horizon, d.q0, &mc, |r| {
        if !quiet {
            eprintln!(
                "a={} b={} {} mreg={:.6e} +- {:.2e} {}",
                r.a, r.b, r.strategy, r.mreg, r.mreg_stderr, r.flags
            );
        }
    })?;
    if cfg.output.wants(Format::Csv) {
        emit_text(report, out_dir.join("regret.csv"), &regret_csv(&rows))?;
    }
    if cfg.output.wants(Format::Json) {
        emit_json(report, out_dir.join("regret_summary.json"), &regret_summary(&rows))?;
    }
    Ok(())
}

fn verify_lemma(cfg: &RunConfig, out_dir: &Path, quiet: bool, report: &mut RunReport) -> Result<(), RunError> {
    let mc = cfg.mc.to_mc()?;
    let block = cfg.lemma.as_ref().expect("checked");
    let mut rows = Vec::new();
    for case in &block.cases {
        let id = case.lemma_id()?;
        for beta in case.beta.values() {
            let spec = LemmaTrialSpec {
                lemma: id,
                q0: case.q0,
                alpha: case.alpha,
                beta,
                tau: case.tau,
                eta: case.eta,
                t_hat: case.t_hat,
                mc,
            };
            let (est, params) = if id.is_bkpl() {
                let (stay, exit) = estimate_lemma_bkpl(&spec)?;
                let tau = spec.tau.unwrap_or_else(|| spec.tau_rule());
                let params = json!({
                    "q0": json_f64(spec.q0), "alpha": json_f64(spec.alpha), "beta": json_f64(beta),
                    "tau": json_f64(tau), "T_hat": json_f64(spec.t_hat),
                });
                (if id == LemmaId::BkplA { stay } else { exit }, params)
            } else {
                let p = estimate_lemma_nhl(&spec)?;
                let params = json!({
                    "q0": json_f64(spec.q0), "alpha": json_f64(spec.alpha),
                    "eta": json_f64(spec.eta), "T_hat": json_f64(spec.t_hat),
                });
                (p, params)
            };
            if !quiet {
                eprintln!("{id} {params} p={:.6e} +- {:.2e}", est.p, est.stderr);
            }
            rows.push(LemmaRow { lemma: id.to_string(), params, estimate: est.p, stderr: est.stderr, n: est.n });
        }
    }
    if cfg.output.wants(Format::Csv) {
        emit_text(report, out_dir.join("lemma.csv"), &lemma_csv(&rows))?;
    }
    if cfg.output.wants(Format::Json) {
        emit_json(report, out_dir.join("lemma_summary.json"), &lemma_summary(&rows))?;
    }
    Ok(())
}
