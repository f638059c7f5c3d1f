use crate::error::{ensure_finite, LabError, Result};
use crate::sde::{simulate_controlled_path, NoiseSource, ProblemDynamics, SimGrid};
use crate::strategy::StrategyBlueprint;
use rayon::prelude::*;

/// Monte Carlo settings. Step sizes left as `None` take the engine defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub dt_base: Option<f64>,
    pub dt_testing: Option<f64>,
    /// Pair path `2k` with the mirror image of its noise at `2k + 1`.
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: u64, seed: u64) -> Result<Self> {
        let mc = McConfig { n_paths, seed, dt_base: None, dt_testing: None, antithetic: false };
        mc.validate()?;
        Ok(mc)
    }

    pub fn with_dt(mut self, dt_base: f64) -> Self {
        self.dt_base = Some(dt_base);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(LabError::Domain(format!(
                "n_paths must be >= 2 for a standard error, got {}",
                self.n_paths
            )));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(LabError::Domain("antithetic sampling needs an even n_paths".into()));
        }
        for (n, x) in [("dt_base", self.dt_base), ("dt_testing", self.dt_testing)] {
            if let Some(x) = x {
                ensure_finite(n, x)?;
                if x <= 0.0 {
                    return Err(LabError::Domain(format!("{n} must be > 0, got {x}")));
                }
            }
        }
        Ok(())
    }

    /// Grid for one blueprint: engine defaults with the configured overrides.
    pub fn grid_for(&self, horizon: f64, bp: &StrategyBlueprint) -> Result<SimGrid> {
        let d = SimGrid::default_for(horizon, bp)?;
        let dt_base = self.dt_base.unwrap_or(d.dt_base);
        let dt_testing = self.dt_testing.unwrap_or(d.dt_testing).min(dt_base);
        SimGrid::new(dt_base, dt_testing, horizon)
    }

    /// Noise for path `i`, honoring antithetic pairing.
    pub fn noise(&self, i: u64) -> NoiseSource {
        if self.antithetic {
            let n = NoiseSource::new(self.seed, i / 2);
            if i % 2 == 1 {
                n.mirrored()
            } else {
                n
            }
        } else {
            NoiseSource::new(self.seed, i)
        }
    }
}

/// Sample mean with its standard error, stored with its sufficient statistics.
///
/// Under antithetic sampling the samples are pair means and `n` counts pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl CostEstimate {
    pub fn from_stats(sum: f64, sum_sq: f64, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(LabError::Domain(format!("need >= 2 samples, got {n}")));
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0);
        Ok(CostEstimate { mean, stderr: (var / nf).sqrt(), n, sum, sum_sq })
    }

    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        Self::from_stats(pairwise_sum(xs), pairwise_sum(&sq), xs.len() as u64)
    }

    /// Estimate that overflowed: infinite mean and error.
    pub fn overflowed(n: u64) -> Self {
        CostEstimate { mean: f64::INFINITY, stderr: f64::INFINITY, n, sum: f64::INFINITY, sum_sq: f64::INFINITY }
    }
}

/// Sum in a fixed binary-tree order, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().fold(0.0, |a, x| a + x)
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Evaluate `f` on every path in parallel and return per-sample values in
/// path order (pair means under antithetic sampling). The first failing path
/// by index is reported.
pub(crate) fn path_values<F>(mc: &McConfig, f: F) -> Result<Vec<f64>>
where
    F: Fn(NoiseSource) -> Result<f64> + Sync,
{
    mc.validate()?;
    let results: Vec<Result<f64>> = (0..mc.n_paths).into_par_iter().map(|i| f(mc.noise(i))).collect();
    let mut values = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                return Err(LabError::Path { path: i as u64, seed: mc.seed, source: Box::new(e) })
            }
        }
    }
    if mc.antithetic {
        Ok(values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    } else {
        Ok(values)
    }
}

/// Monte Carlo estimate of the expected cost of `bp` under `dynamics`.
pub fn estimate_expected_cost(
    dynamics: &ProblemDynamics,
    bp: &StrategyBlueprint,
    mc: &McConfig,
) -> Result<CostEstimate> {
    let grid = mc.grid_for(dynamics.horizon, bp)?;
    let values = path_values(mc, |noise| Ok(simulate_controlled_path(dynamics, bp, &grid, noise)?.cost))?;
    CostEstimate::from_samples(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::make_constant_gain;

    #[test]
    fn single_path_is_rejected() {
        assert!(McConfig::new(1, 0).is_err());
        let mut mc = McConfig::new(3, 0).unwrap();
        mc.antithetic = true;
        assert!(mc.validate().is_err());
    }

    #[test]
    fn estimate_from_stats_matches_samples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let e = CostEstimate::from_samples(&xs).unwrap();
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(CostEstimate::from_stats(e.sum, e.sum_sq, e.n).unwrap(), e);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }

    #[test]
    fn path_errors_carry_index_and_seed() {
        let dynamics = ProblemDynamics::new(400.0, 0.0, 1.0, 1.0).unwrap();
        let bp = make_constant_gain(0.0).unwrap();
        let mc = McConfig::new(4, 9).unwrap().with_dt(0.5);
        match estimate_expected_cost(&dynamics, &bp, &mc) {
            Err(LabError::Path { path, seed, source }) => {
                assert_eq!((path, seed), (0, 9));
                assert!(source.is_overflow());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn antithetic_pairs_reduce_to_pair_means() {
        let dynamics = ProblemDynamics::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let bp = make_constant_gain(0.0).unwrap();
        let mut mc = McConfig::new(8, 1).unwrap().with_dt(0.01);
        mc.antithetic = true;
        let e = estimate_expected_cost(&dynamics, &bp, &mc).unwrap();
        assert_eq!(e.n, 4);
    }
}
