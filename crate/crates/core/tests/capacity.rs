use cellcap::capacity::{
    avg_capacity, capacity_sweep, desired_pdf_chisq, ratio_pdf, CapacityAxis, CapacityScenario,
    CoopConfig, BS_DENSITY_RANGE,
};
use cellcap::interference::levy_gamma_miso;
use cellcap::quad::{integrate_positive_axis, Tolerance};
use proptest::prelude::*;

fn gamma_default() -> f64 {
    CapacityScenario::default().gamma().unwrap()
}

#[test]
fn densities_are_normalized() {
    let g = gamma_default();
    for n_b in 1..=3 {
        for n_t_c in 1..=4 {
            let cfg = CoopConfig::new(n_b, n_t_c, 500.0).unwrap();
            let tol = Tolerance::new(0.0, 1e-11);
            let d =
                integrate_positive_axis(|x| desired_pdf_chisq(x, &cfg).unwrap(), 2.0, tol).unwrap();
            assert!((d.value - 1.0).abs() < 1e-9);
            let r = integrate_positive_axis(|e| ratio_pdf(e, &cfg, g).unwrap(), 1.0 / (g * g), tol)
                .unwrap();
            assert!((r.value - 1.0).abs() < 1e-4);
        }
    }
}

#[test]
fn coop_antenna_sweep_is_monotone_with_diminishing_returns() {
    for interferer_n_t in [1, 2, 4] {
        let scenario = CapacityScenario {
            interferer_n_t,
            ..CapacityScenario::default()
        };
        let curves = capacity_sweep(
            CapacityAxis::CoopAntennas,
            &scenario,
            &[1, 2, 3],
            &[1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        for c in &curves {
            let steps: Vec<f64> = c.y.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(steps.iter().all(|&s| s >= 0.0), "{}", c.series);
            assert!(steps.windows(2).all(|w| w[1] <= w[0]), "{}", c.series);
        }
        for w in curves.windows(2) {
            assert!(w[0].y.iter().zip(&w[1].y).all(|(a, b)| b >= a));
        }
    }
}

#[test]
fn density_sweep_is_non_increasing() {
    let (lo, hi) = BS_DENSITY_RANGE;
    let grid: Vec<f64> = (0..13).map(|i| lo + (hi - lo) * i as f64 / 12.0).collect();
    let curves = capacity_sweep(
        CapacityAxis::BsDensity,
        &CapacityScenario::default(),
        &[1, 2, 3],
        &grid,
    )
    .unwrap();
    for c in &curves {
        assert!(c.y.windows(2).all(|w| w[1] <= w[0]), "{}", c.series);
    }
    for w in curves.windows(2) {
        assert!(w[0].y.iter().zip(&w[1].y).all(|(a, b)| b >= a));
    }
}

#[test]
fn out_of_range_sweep_points_are_rejected() {
    let s = CapacityScenario::default();
    assert!(s.capacity_at(CapacityAxis::CoopAntennas, 1, 5.0).is_err());
    assert!(s.capacity_at(CapacityAxis::CoopAntennas, 1, 1.5).is_err());
    assert!(s.capacity_at(CapacityAxis::BsDensity, 1, 4e-6).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_falls_with_distance(n_b in 1u32..=3, n_t_c in 1u32..=4, r in 100.0f64..2000.0, f in 1.01f64..3.0) {
        let g = gamma_default();
        let near = avg_capacity(&CoopConfig::new(n_b, n_t_c, r).unwrap(), g).unwrap().value;
        let far = avg_capacity(&CoopConfig::new(n_b, n_t_c, f * r).unwrap(), g).unwrap().value;
        prop_assert!(far <= near && far > 0.0);
    }

    #[test]
    fn capacity_falls_with_density(n_b in 1u32..=3, l in 1e-7f64..1e-5, f in 1.01f64..4.0) {
        let cfg = CoopConfig::new(n_b, 2, 500.0).unwrap();
        let low = avg_capacity(&cfg, levy_gamma_miso(l, 2).unwrap()).unwrap().value;
        let high = avg_capacity(&cfg, levy_gamma_miso(f * l, 2).unwrap()).unwrap().value;
        prop_assert!(high <= low);
    }
}
