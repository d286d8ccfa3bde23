use cellcap::capacity::{avg_capacity, CoopConfig};
use cellcap::channel::{NetworkParams, ShadowingParams};
use cellcap::interference::{levy_cdf, stable_scale};
use cellcap::montecarlo::{
    ks_distance, simulate_capacity, simulate_interference_batch, EmpiricalDistribution, SimConfig,
};
use proptest::prelude::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn default_sim(r_max: f64, n: usize, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(
        NetworkParams::default(),
        ShadowingParams::from_sigma_db(6.0, 1.0).unwrap(),
    );
    cfg.r_max = r_max;
    cfg.n_samples = n;
    cfg.seed = seed;
    cfg
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = default_sim(5_000.0, 20_000, 9);
    let one = in_pool(1, || simulate_interference_batch(&cfg).unwrap());
    let many = in_pool(4, || simulate_interference_batch(&cfg).unwrap());
    assert_eq!(one.samples(), many.samples());

    let coop = CoopConfig::new(2, 2, 500.0).unwrap();
    let a = in_pool(1, || simulate_capacity(&coop, 1e-5, 50_000, 3).unwrap());
    let b = in_pool(3, || simulate_capacity(&coop, 1e-5, 50_000, 3).unwrap());
    assert_eq!(a, b);
}

#[test]
fn truncation_error_shrinks_with_radius() {
    let gamma_levy = stable_scale(
        &NetworkParams::default(),
        &ShadowingParams::from_sigma_db(6.0, 1.0).unwrap(),
    )
    .unwrap()
    .gamma;
    let ks: Vec<f64> = [10_000.0, 25_000.0, 50_000.0]
        .iter()
        .map(|&r| {
            let emp = simulate_interference_batch(&default_sim(r, 100_000, 42)).unwrap();
            ks_distance(&emp, |y| levy_cdf(y, gamma_levy)).unwrap()
        })
        .collect();
    for w in ks.windows(2) {
        assert!(w[1] <= w[0] + 0.003, "{ks:?}");
    }
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let cfg = CoopConfig::new(2, 2, 500.0).unwrap();
    let se: Vec<f64> = [10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| simulate_capacity(&cfg, 1e-5, n, 11).unwrap().error_estimate)
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1] / 10f64.sqrt();
        assert!((0.5..=2.0).contains(&ratio), "{se:?}");
    }
}

#[test]
fn capacity_estimate_brackets_analytic_value() {
    let cfg = CoopConfig::new(1, 3, 500.0).unwrap();
    let mc = simulate_capacity(&cfg, 1.4e-5, 400_000, 5).unwrap();
    let exact = avg_capacity(&cfg, 1.4e-5).unwrap().value;
    assert!((mc.value - exact).abs() < 4.0 * mc.error_estimate);
}

proptest! {
    #[test]
    fn empirical_cdf_and_quantile_are_consistent(mut xs in prop::collection::vec(-1e3f64..1e3, 2..200), p in 0.0f64..1.0) {
        xs.iter_mut().for_each(|x| *x = x.round());
        let emp = EmpiricalDistribution::new(xs).unwrap();
        let q = emp.quantile(p);
        prop_assert!(emp.cdf(q) >= p - 1e-12);
        prop_assert!(emp.samples().windows(2).all(|w| w[0] <= w[1]));
    }
}
