use aclab::experiments::{estimate_expected_cost, McConfig};
use aclab::sde::{
    accumulate_cost, ou_exact_step, simulate_controlled_path, NoiseSource, ProblemDynamics, SimGrid,
};
use aclab::strategy::{make_br, make_constant_gain, replay, BrParams, StrategyBlueprint};
use aclab::LabError;
use proptest::prelude::*;

fn grid(bp: &StrategyBlueprint, horizon: f64) -> SimGrid {
    SimGrid::default_for(horizon, bp).unwrap()
}

#[test]
fn noise_free_unit_gain_cost() {
    let d = ProblemDynamics::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let bp = make_constant_gain(1.0).unwrap();
    let log = simulate_controlled_path(&d, &bp, &grid(&bp, 1.0), NoiseSource::zero()).unwrap();
    let want = 1.0 - (-2.0f64).exp();
    assert!((log.cost - want).abs() < 1e-12, "{} vs {want}", log.cost);
    // q(t) = e^{-t} at every grid point
    for (&t, &q) in log.times.iter().zip(&log.positions) {
        assert!((q - (-t).exp()).abs() < 1e-12);
    }
}

#[test]
fn uncontrolled_brownian_cost_mean() {
    // E int_0^1 (1 + W)^2 dt = 1 + 1/2
    let d = ProblemDynamics::new(0.0, 3.0, 1.0, 1.0).unwrap();
    let bp = make_constant_gain(0.0).unwrap();
    let mc = McConfig::new(20_000, 5).unwrap().with_dt(0.01);
    let e = estimate_expected_cost(&d, &bp, &mc).unwrap();
    assert!((e.mean - 1.5).abs() < 4.0 * e.stderr, "{} +- {}", e.mean, e.stderr);
}

#[test]
fn terminal_law_matches_ou_moments() {
    // closed loop rate lambda = a - b alpha
    let (a, b, alpha, q0): (f64, f64, f64, f64) = (0.5, 2.0, 1.0, 1.5);
    let lambda = a - b * alpha;
    let mean = q0 * lambda.exp();
    let var = (2.0 * lambda).exp_m1() / (2.0 * lambda);
    let d = ProblemDynamics::new(a, b, q0, 1.0).unwrap();
    let bp = make_constant_gain(alpha).unwrap();
    let g = SimGrid::new(0.1, 0.1, 1.0).unwrap();
    let n = 40_000;
    let ends: Vec<f64> = (0..n)
        .map(|i| {
            let log = simulate_controlled_path(&d, &bp, &g, NoiseSource::new(17, i)).unwrap();
            *log.positions.last().unwrap()
        })
        .collect();
    let m = ends.iter().sum::<f64>() / n as f64;
    let v = ends.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "{m} vs {mean}");
    assert!((v - var).abs() < 4.0 * var * (2.0 / n as f64).sqrt(), "{v} vs {var}");
}

#[test]
fn exact_step_composes() {
    // noise-free: two half steps land where one full step does
    let one = ou_exact_step(1.0, -2.0, 0.3, 0.4, 0.0).unwrap();
    let half = ou_exact_step(1.0, -2.0, 0.3, 0.2, 0.0).unwrap();
    let two = ou_exact_step(half, -2.0, 0.3, 0.2, 0.0).unwrap();
    assert!((one - two).abs() < 1e-14);
    let want = (-0.8f64).exp() + 0.3 * (1.0 - (-0.8f64).exp()) / 2.0;
    assert!((one - want).abs() < 1e-14);
}

#[test]
fn repeat_runs_are_bit_identical() {
    let d = ProblemDynamics::new(10.0, -0.3, 1.0, 1.0).unwrap();
    let bp = make_br(10.0, 1.0, 1.0).unwrap();
    let g = grid(&bp, 1.0);
    for i in 0..5 {
        let x = simulate_controlled_path(&d, &bp, &g, NoiseSource::new(3, i)).unwrap();
        let y = simulate_controlled_path(&d, &bp, &g, NoiseSource::new(3, i)).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.cost.to_bits(), y.cost.to_bits());
    }
}

#[test]
fn mirrored_start_mirrors_the_path() {
    for &(a, b) in &[(10.0, 0.7), (0.5, -2.0), (-30.0, 5.0)] {
        let up = make_br(a, 1.0, 1.0).unwrap();
        let down = make_br(a, 1.0, -1.0).unwrap();
        let dp = ProblemDynamics::new(a, b, 1.0, 1.0).unwrap();
        let dn = ProblemDynamics::new(a, b, -1.0, 1.0).unwrap();
        let x = simulate_controlled_path(&dp, &up, &grid(&up, 1.0), NoiseSource::new(8, 2)).unwrap();
        let y = simulate_controlled_path(&dn, &down, &grid(&down, 1.0), NoiseSource::new(8, 2).mirrored())
            .unwrap();
        assert_eq!(x.times, y.times);
        assert!(x.positions.iter().zip(&y.positions).all(|(p, q)| *p == -*q));
        assert!(x.controls.iter().zip(&y.controls).all(|(p, q)| *p == -*q));
        assert_eq!(x.events, y.events);
        assert_eq!(x.cost.to_bits(), y.cost.to_bits());
    }
}

#[test]
fn recorded_controls_are_causal() {
    let d = ProblemDynamics::new(15.0, 4.0, 1.0, 1.0).unwrap();
    let bp = make_br(15.0, 1.0, 1.0).unwrap();
    let log = simulate_controlled_path(&d, &bp, &grid(&bp, 1.0), NoiseSource::new(1, 0)).unwrap();
    let again = replay(&bp, 1.0, &log.times, &log.positions).unwrap();
    assert_eq!(&again[..log.controls.len()], &log.controls[..]);
}

#[test]
fn segment_costs_sum_to_path_cost() {
    let d = ProblemDynamics::new(5.0, -1.0, 1.0, 1.0).unwrap();
    let bp = make_br(5.0, 1.0, 1.0).unwrap();
    let log = simulate_controlled_path(&d, &bp, &grid(&bp, 1.0), NoiseSource::new(4, 4)).unwrap();
    assert_eq!(accumulate_cost(&log).unwrap().to_bits(), log.cost.to_bits());
    let mut bad = log.clone();
    bad.segment_costs[0] *= 2.0;
    assert!(matches!(accumulate_cost(&bad), Err(LabError::InternalState(_))));
}

#[test]
fn deadline_sliver_is_a_grid_error() {
    let p = BrParams::with_constants(10.0, 1.0, 1.0, None, None, Some(1e-13)).unwrap();
    let bp = StrategyBlueprint::br(p).unwrap();
    let d = ProblemDynamics::new(10.0, 1.0, 1.0, 1.0).unwrap();
    let r = simulate_controlled_path(&d, &bp, &grid(&bp, 1.0), NoiseSource::zero());
    assert!(matches!(r, Err(LabError::Grid(_))), "{r:?}");
}

#[test]
fn mismatched_blueprint_is_rejected() {
    let bp = make_br(10.0, 1.0, 1.0).unwrap();
    let d = ProblemDynamics::new(11.0, 1.0, 1.0, 1.0).unwrap();
    assert!(simulate_controlled_path(&d, &bp, &grid(&bp, 1.0), NoiseSource::zero()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_costs_are_positive(
        a in -20.0f64..8.0,
        b in -50.0f64..50.0,
        alpha in -3.0f64..3.0,
        q0 in -3.0f64..3.0,
        seed in 0u64..1000,
    ) {
        let d = ProblemDynamics::new(a, b, q0, 1.0).unwrap();
        let bp = make_constant_gain(alpha).unwrap();
        let g = SimGrid::new(0.01, 0.01, 1.0).unwrap();
        let log = simulate_controlled_path(&d, &bp, &g, NoiseSource::new(seed, 0)).unwrap();
        prop_assert!(log.cost > 0.0);
        prop_assert!(log.segment_costs.iter().all(|&c| c >= 0.0));
        prop_assert_eq!(accumulate_cost(&log).unwrap().to_bits(), log.cost.to_bits());
    }
}
