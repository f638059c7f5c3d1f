//! JSON run configuration.

use crate::error::{LabError, Result};
use crate::experiments::{LemmaId, McConfig, StrategySpec};
use serde::{Deserialize, Serialize};

pub const DEFAULT_N_PATHS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Sweep,
    VerifyLemma,
    Baselines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub dynamics: Option<DynamicsBlock>,
    #[serde(default)]
    pub strategies: Vec<StrategyEntry>,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub lemma: Option<LemmaBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signs {
    #[default]
    Both,
    Positive,
    Negative,
}

/// Either a single `value`, or `points` log-spaced magnitudes from
/// `10^log_min` to `10^log_max` with the requested signs and optionally 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_max: Option<f64>,
    pub points: usize,
    #[serde(default)]
    pub include_zero: bool,
    #[serde(default)]
    pub signs: Signs,
}

impl GridSpec {
    /// Zero first, then each magnitude in increasing order, positive before negative.
    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(v) = self.value {
            if self.points != 1 || self.log_min.is_some() || self.log_max.is_some() || self.include_zero {
                return Err(LabError::Config("a fixed-value grid takes only \"points\": 1".into()));
            }
            return Ok(vec![v]);
        }
        let (lo, hi) = match (self.log_min, self.log_max) {
            (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo <= hi => (lo, hi),
            _ => {
                return Err(LabError::Config(
                    "log grid needs finite log_min <= log_max".into(),
                ))
            }
        };
        if self.points == 0 {
            return Err(LabError::Config("grid needs points >= 1".into()));
        }
        let mut out = Vec::new();
        if self.include_zero {
            out.push(0.0);
        }
        for k in 0..self.points {
            let e = if self.points == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (self.points - 1) as f64
            };
            let m = 10f64.powf(e);
            if self.signs != Signs::Negative {
                out.push(m);
            }
            if self.signs != Signs::Positive {
                out.push(-m);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BSpec {
    One(f64),
    Many(Vec<f64>),
    Grid(GridSpec),
}

impl BSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            BSpec::One(x) => Ok(vec![*x]),
            BSpec::Many(v) => Ok(v.clone()),
            BSpec::Grid(g) => g.values(),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    pub a: OneOrMany,
    pub b: BSpec,
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub q0: f64,
}

/// Strategy entry; `a`, `T` and `q0` come from the dynamics block.
/// `opt` without `beta` uses the true `b` of each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub big_a: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl StrategyEntry {
    pub fn to_spec(&self) -> Result<StrategySpec> {
        let only = |allowed: &[&str]| -> Result<()> {
            let present = [
                ("alpha", self.alpha.is_some()),
                ("beta", self.beta.is_some()),
                ("A", self.big_a.is_some()),
                ("K", self.k_gain.is_some()),
                ("tau", self.tau.is_some()),
            ];
            for (name, p) in present {
                if p && !allowed.contains(&name) {
                    return Err(LabError::Config(format!(
                        "strategy \"{}\" does not take \"{name}\"",
                        self.kind
                    )));
                }
            }
            Ok(())
        };
        match self.kind.as_str() {
            "cg" => {
                only(&["alpha"])?;
                let alpha = self
                    .alpha
                    .ok_or_else(|| LabError::Config("cg strategy needs \"alpha\"".into()))?;
                Ok(StrategySpec::ConstantGain { alpha })
            }
            "opt" => {
                only(&["beta"])?;
                Ok(match self.beta {
                    Some(beta) => StrategySpec::OptimalAssumed { beta },
                    None => StrategySpec::OptimalTrue,
                })
            }
            "br" => {
                only(&["A", "K", "tau"])?;
                Ok(StrategySpec::Br { big_a: self.big_a, k_gain: self.k_gain, tau: self.tau })
            }
            other => Err(LabError::Config(format!("unknown strategy kind \"{other}\""))),
        }
    }
}

fn default_n_paths() -> u64 {
    DEFAULT_N_PATHS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default = "default_n_paths")]
    pub n_paths: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub dt_base: Option<f64>,
    #[serde(default)]
    pub dt_testing: Option<f64>,
    #[serde(default)]
    pub antithetic: bool,
}

impl Default for McBlock {
    fn default() -> Self {
        McBlock {
            n_paths: DEFAULT_N_PATHS,
            seed: DEFAULT_SEED,
            dt_base: None,
            dt_testing: None,
            antithetic: false,
        }
    }
}

impl McBlock {
    /// Settings without the `n_paths >= 2` check, for trajectory dumps.
    pub fn raw(&self) -> McConfig {
        McConfig {
            n_paths: self.n_paths,
            seed: self.seed,
            dt_base: self.dt_base,
            dt_testing: self.dt_testing,
            antithetic: self.antithetic,
        }
    }

    pub fn to_mc(&self) -> Result<McConfig> {
        let mc = self.raw();
        mc.validate().map_err(|e| LabError::Config(format!("mc: {e}")))?;
        Ok(mc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: default_dir(), formats: default_formats() }
    }
}

impl OutputBlock {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn zero_beta() -> OneOrMany {
    OneOrMany::One(0.0)
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaCase {
    pub lemma: String,
    #[serde(default = "one")]
    pub q0: f64,
    pub alpha: f64,
    /// A list runs one trial per value.
    #[serde(default = "zero_beta")]
    pub beta: OneOrMany,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "half")]
    pub eta: f64,
    #[serde(rename = "T_hat", default = "one")]
    pub t_hat: f64,
}

impl LemmaCase {
    pub fn lemma_id(&self) -> Result<LemmaId> {
        self.lemma.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaBlock {
    pub cases: Vec<LemmaCase>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn dynamics(&self) -> Result<&DynamicsBlock> {
        self.dynamics
            .as_ref()
            .ok_or_else(|| LabError::Config("this command needs a \"dynamics\" block".into()))
    }

    pub fn strategy_specs(&self) -> Result<Vec<StrategySpec>> {
        self.strategies.iter().map(|s| s.to_spec()).collect()
    }

    /// Structural checks that do not run anything.
    pub fn check(&self) -> Result<()> {
        match self.command {
            Command::Simulate | Command::Sweep | Command::Baselines => {
                let d = self.dynamics()?;
                if !(d.horizon.is_finite() && d.horizon > 0.0) {
                    return Err(LabError::Config(format!("T must be finite and > 0, got {}", d.horizon)));
                }
                if !d.q0.is_finite() {
                    return Err(LabError::Config("q0 must be finite".into()));
                }
                let a = d.a.values();
                let b = d.b.values()?;
                if a.is_empty() || b.is_empty() {
                    return Err(LabError::Config("a and b need at least one value".into()));
                }
                if a.iter().chain(&b).any(|x| !x.is_finite()) {
                    return Err(LabError::Config("a and b values must be finite".into()));
                }
                self.strategy_specs()?;
                if self.lemma.is_some() {
                    return Err(LabError::Config("\"lemma\" is only used by verify-lemma".into()));
                }
            }
            Command::VerifyLemma => {
                let block = self
                    .lemma
                    .as_ref()
                    .ok_or_else(|| LabError::Config("verify-lemma needs a \"lemma\" block".into()))?;
                if block.cases.is_empty() {
                    return Err(LabError::Config("lemma block has no cases".into()));
                }
                for c in &block.cases {
                    c.lemma_id()?;
                }
            }
        }
        match self.command {
            Command::Simulate => {
                if self.strategies.len() != 1 {
                    return Err(LabError::Config("simulate needs exactly one strategy".into()));
                }
                let d = self.dynamics()?;
                if d.a.values().len() != 1 || d.b.values()?.len() != 1 {
                    return Err(LabError::Config("simulate needs a single a and a single b".into()));
                }
                if self.mc.n_paths == 0 {
                    return Err(LabError::Config("simulate needs n_paths >= 1".into()));
                }
            }
            Command::Sweep => {
                if self.strategies.is_empty() {
                    return Err(LabError::Config("sweep needs at least one strategy".into()));
                }
                self.mc.to_mc()?;
            }
            Command::Baselines => {
                if !self.strategies.is_empty() {
                    return Err(LabError::Config(
                        "baselines uses a fixed strategy set; remove \"strategies\"".into(),
                    ));
                }
                self.mc.to_mc()?;
            }
            Command::VerifyLemma => {
                self.mc.to_mc()?;
            }
        }
        Ok(())
    }
}
