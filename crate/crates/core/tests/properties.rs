use chiral_qed::config;
use chiral_qed::experiments::{Axis, AxisGrid, Engine, SweepSpec};
use chiral_qed::markovian;
use chiral_qed::scattering::{channel_overlap, overlap_matrix, transmission_spectrum, Branch};
use chiral_qed::{QubitParams, SystemConfig};
use proptest::prelude::*;

fn pair(d1: f64, d2: f64, b1: f64, b2: f64, gamma_total: f64, d_tilde: f64) -> SystemConfig {
    SystemConfig {
        qubit1: QubitParams::from_targets(1.0, d1, b1, gamma_total, 0.0).unwrap(),
        qubit2: QubitParams::from_targets(1.0, d2, b2, gamma_total, 2.0 * std::f64::consts::PI * d_tilde).unwrap(),
        v_g: 1.0,
        omega0: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn analytic_peak_is_symmetric_and_bounded(d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0) {
        let a = markovian::cmax_analytic(d1, d2).unwrap();
        let b = markovian::cmax_analytic(d2, d1).unwrap();
        prop_assert!((a - b).abs() < 1e-15);
        prop_assert!((0.0..=2.0 / std::f64::consts::E + 1e-15).contains(&a));
    }

    #[test]
    fn analytic_peak_bounds_the_trace(d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0, k in 1u32..6, gt in 0.0f64..30.0) {
        let s = pair(d1, d2, 1.0, 1.0, 2e-5, k as f64 * 0.5).validate().unwrap();
        let c = markovian::concurrence_analytic(&s, gt / s.max_gamma()).unwrap();
        prop_assert!(c <= markovian::cmax_analytic(d1, d2).unwrap() + 1e-12);
    }

    #[test]
    fn lossless_overlap_is_identity(d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0, g in 1e-3f64..0.1, dt in 0.05f64..3.0, e in -10.0f64..10.0) {
        prop_assume!(d1.abs() > 1e-3 || d2.abs() > 1e-3 || (2.0 * dt - (2.0 * dt).round()).abs() > 1e-3);
        let s = pair(d1, d2, 1.0, 1.0, g, dt).validate().unwrap();
        let m = overlap_matrix(&s, 1.0 + e * g).unwrap();
        prop_assert!((m.entries[0][0] - 1.0).norm() < 1e-10);
        prop_assert!((m.entries[1][1] - 1.0).norm() < 1e-10);
        prop_assert!(m.entries[0][1].norm() < 1e-10);
    }

    #[test]
    fn lossy_overlaps_are_hermitian_and_complete(
        d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0, b1 in 0.5f64..1.0, b2 in 0.5f64..1.0,
        g in 1e-3f64..0.1, dt in 0.05f64..3.0, e in -10.0f64..10.0,
    ) {
        let s = pair(d1, d2, b1, b2, g, dt).validate().unwrap();
        let energy = 1.0 + e * g;
        let m = overlap_matrix(&s, energy).unwrap();
        prop_assert!(m.hermiticity_error() < 1e-10);
        prop_assert!(m.entries[0][0].re <= 1.0 + 1e-12 && m.entries[1][1].re <= 1.0 + 1e-12);
        // With the reservoir continua included the channels are orthonormal.
        let (full, channels) = channel_overlap(&s, energy).unwrap();
        prop_assert_eq!(channels.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((full[(i, j)] - expect).norm() < 1e-10, "({i},{j}) = {}", full[(i, j)]);
            }
        }
    }

    #[test]
    fn loss_only_removes_flux(
        d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0, b1 in 0.3f64..=1.0, b2 in 0.3f64..=1.0,
        g in 1e-3f64..0.1, dt in 0.05f64..3.0, e in -10.0f64..10.0,
    ) {
        let s = pair(d1, d2, b1, b2, g, dt).validate().unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let p = transmission_spectrum(&s, &[1.0 + e * g], branch).unwrap()[0];
            prop_assert!(p.flux_deficit > -1e-12 && p.flux_deficit < 1.0 + 1e-12);
        }
    }

    #[test]
    fn config_survives_toml(d1 in -1.0f64..=1.0, b in 0.1f64..=1.0, g in 1e-6f64..1.0, dt in 0.01f64..100.0, det in -1e-2f64..1e-2) {
        let cfg = pair(d1, -d1, b, b, g, dt).with_detuning(det);
        prop_assert_eq!(config::parse(&config::to_toml(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn axis_application_is_idempotent(value in -1.0f64..=1.0, dt in 0.1f64..5.0) {
        for axis in [Axis::Delta1, Axis::Delta2, Axis::Delta] {
            let mut once = SystemConfig::symmetric(0.3, 0.9, 1e-3, dt).unwrap();
            axis.apply(&mut once, value).unwrap();
            let mut twice = once;
            axis.apply(&mut twice, value).unwrap();
            for (a, b) in [(once.qubit1, twice.qubit1), (once.qubit2, twice.qubit2)] {
                for (x, y) in [(a.gamma_r, b.gamma_r), (a.gamma_l, b.gamma_l), (a.gamma_loss, b.gamma_loss)] {
                    prop_assert!((x - y).abs() <= 1e-14 * (a.gamma_r + a.gamma_l));
                }
            }
        }
    }

    #[test]
    fn sweep_coordinates_enumerate_the_grid(n1 in 1usize..6, n2 in 1usize..6, n3 in 1usize..4) {
        let spec = SweepSpec::custom(
            SystemConfig::symmetric(0.0, 1.0, 1e-3, 1.0).unwrap(),
            vec![
                AxisGrid::linear(Axis::Delta1, -1.0, 1.0, n1),
                AxisGrid::linear(Axis::Delta2, -1.0, 1.0, n2),
                AxisGrid::log(Axis::GammaTotal, 1e-4, 1e-2, n3),
            ],
            Engine::Markovian,
        );
        prop_assert_eq!(spec.len(), n1 * n2 * n3);
        let mut seen: Vec<Vec<u64>> = (0..spec.len())
            .map(|i| spec.coordinates(i).iter().map(|x| x.to_bits()).collect())
            .collect();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), spec.len());
    }
}
