use proptest::prelude::*;
use volest_core::estimate::{estimate_at_steps, estimate_theta, estimate_theta_linear, martingale_ratio};
use volest_core::harness::table1_rows;
use volest_core::models::{CoefFn, ModelSpec, TimeGrid, VolKind, VolatilityModel};
use volest_core::simulate::{simulate_pair, NoiseStream};
use volest_core::Config;

fn rel_close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

#[test]
fn general_and_linear_estimators_agree() {
    let grid = TimeGrid::new(2.0, 1e-3).unwrap();
    let base = Config::default();
    for i in 0..50u32 {
        let row = table1_rows()[i as usize % 7];
        let spec = row.config(&base).spec().unwrap();
        let path = simulate_pair(&spec, &grid, &NoiseStream::new(21, i)).unwrap();
        let general = estimate_theta(&spec, &path).unwrap().theta_hat;
        let linear = estimate_theta_linear(&spec.sigma2, &path).unwrap().theta_hat;
        assert!(rel_close(general, linear, linear.abs(), 1e-12), "row {}: {general} vs {linear}", row.id);
    }
}

#[test]
fn unit_coefficients_give_the_exact_law() {
    // a = x, sigma1 sigma2 = x: g = 1, so theta_hat - theta = W_T / T
    let vol = VolatilityModel::bachelier(0.0, 1.0, 0.0).unwrap();
    let spec = ModelSpec::linear(2.0, CoefFn::ONE, vol, 1.0, 0.0);
    let grid = TimeGrid::new(5.0, 1e-3).unwrap();
    for i in 0..20 {
        let path = simulate_pair(&spec, &grid, &NoiseStream::new(1, i)).unwrap();
        let w_t: f64 = path.dw.as_ref().unwrap().iter().sum();
        let est = estimate_theta(&spec, &path).unwrap();
        assert!((est.denominator - 5.0).abs() < 1e-9);
        assert!((est.theta_hat - 2.0 - w_t / 5.0).abs() < 1e-12, "{} vs {}", est.theta_hat - 2.0, w_t / 5.0);
    }
}

#[test]
fn long_horizon_estimates_concentrate() {
    let vol = VolatilityModel::cir(1.0, 2.0, 1.0, 1.0).unwrap();
    let spec = ModelSpec::linear(2.0, CoefFn::SqrtY { c: 1.0 }, vol, 1.0, 0.0);
    let grid = TimeGrid::new(200.0, 1e-2).unwrap();
    let path = simulate_pair(&spec, &grid, &NoiseStream::new(8, 0)).unwrap();
    let steps: Vec<usize> = [10.0, 50.0, 200.0].iter().map(|t| (t / 1e-2_f64).round() as usize).collect();
    let est: Vec<f64> = estimate_at_steps(&spec, &path, &steps).into_iter().map(|r| r.unwrap().theta_hat).collect();
    assert!((est[2] - 2.0).abs() < 0.3, "{est:?}");
}

#[test]
fn observed_paths_estimate_without_increments() {
    let vol = VolatilityModel::vasicek(1.0, 0.0, 1.0, 1.0).unwrap();
    let spec = ModelSpec::linear(2.0, CoefFn::SinShift { c: 2.0, d: 1.0 }, vol, 1.0, 0.0);
    let grid = TimeGrid::new(1.0, 1e-2).unwrap();
    let sim = simulate_pair(&spec, &grid, &NoiseStream::new(2, 2)).unwrap();
    let observed = volest_core::PathPair::observed(grid, sim.x.clone(), sim.y.clone()).unwrap();
    assert_eq!(estimate_theta(&spec, &observed).unwrap(), estimate_theta(&spec, &sim).unwrap());
    assert!(martingale_ratio(&spec, &observed).is_err());
}

fn vol_kind() -> impl Strategy<Value = VolKind> {
    prop_oneof![
        (-1.0f64..1.0, 0.2f64..2.0).prop_map(|(alpha, beta)| VolKind::Bachelier { alpha, beta }),
        (-1.0f64..1.0, -1.0f64..1.0, 0.2f64..2.0).prop_map(|(a, b, gamma)| VolKind::Vasicek { a, b, gamma }),
        (-1.0f64..1.0, 0.2f64..2.0).prop_map(|(alpha, beta)| VolKind::Gbm { alpha, beta }),
        (0.5f64..2.0, 1.0f64..3.0).prop_map(|(a, b)| VolKind::Cir { a, b, gamma: (a * b).sqrt() }),
    ]
}

fn sigma2() -> impl Strategy<Value = CoefFn> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|c| CoefFn::Constant { c }),
        (1.5f64..3.0).prop_map(|c| CoefFn::SinShift { c, d: 1.0 }),
        (0.5f64..2.0).prop_map(|c| CoefFn::Reciprocal1p { c }),
        (0.5f64..2.0).prop_map(|c| CoefFn::Power { c, p: 0.25 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn representation_identity_holds_on_synthetic_paths(
        kind in vol_kind(), s2 in sigma2(), theta in -3.0f64..3.0, rho in -0.9f64..0.9,
        seed in any::<u64>(), index in any::<u32>(),
    ) {
        let y0 = if kind.domain().lower == 0.0 { 1.0 } else { 0.5 };
        let vol = VolatilityModel { kind, y0 };
        let spec = ModelSpec::linear(theta, s2, vol, 1.0, rho);
        let grid = TimeGrid::new(1.0, 1e-2).unwrap();
        // recip1p has a pole at y = -1 and power(.., 0.25) vanishes at 0 on
        // the real line; paths that hit a guard carry no identity to check
        let Ok(path) = simulate_pair(&spec, &grid, &NoiseStream::new(seed, index)) else {
            return Ok(());
        };
        if let Ok(est) = estimate_theta(&spec, &path) {
            let ratio = martingale_ratio(&spec, &path).unwrap();
            let scale = est.theta_hat.abs().max(theta.abs() + ratio.abs());
            prop_assert!(rel_close(est.theta_hat - theta, ratio, scale, 1e-12),
                "{} vs {}", est.theta_hat - theta, ratio);
        }
    }

    #[test]
    fn constant_rescaling_of_sigma2_is_invisible(c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], seed in any::<u64>()) {
        let vol = VolatilityModel::cir(1.0, 2.0, 1.0, 1.0).unwrap();
        let spec = ModelSpec::linear(2.0, CoefFn::SqrtY { c: 1.0 }, vol, 1.0, 0.0);
        let path = simulate_pair(&spec, &TimeGrid::new(1.0, 1e-2).unwrap(), &NoiseStream::new(seed, 0)).unwrap();
        let base = estimate_theta_linear(&CoefFn::SqrtY { c: 1.0 }, &path).unwrap().theta_hat;
        let scaled = estimate_theta_linear(&CoefFn::SqrtY { c }, &path).unwrap().theta_hat;
        prop_assert!(rel_close(scaled, base, base.abs(), 1e-12));
    }
}
