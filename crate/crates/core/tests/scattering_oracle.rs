mod common;

use chiral_qed::markovian;
use chiral_qed::scattering::{self, overlap_matrix, propagate, solve_eigenstate, Branch, QuadratureSpec};
use chiral_qed::{QubitParams, System, SystemConfig};
use common::{box_overlap, DelayEquations};

fn sys(delta: f64, beta: f64, gamma_total: f64, d_tilde: f64) -> System {
    SystemConfig::symmetric(delta, beta, gamma_total, d_tilde)
        .unwrap()
        .validate()
        .unwrap()
}

fn compare_with_delay_equations(system: &System, t_max: f64, tol: f64) {
    let dde = DelayEquations::new(system);
    let steps = 400;
    let (h, oracle) = dde.integrate(t_max, steps);
    let stride = oracle.len() / 40;
    let idx: Vec<usize> = (0..oracle.len()).step_by(stride).collect();
    let grid: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
    let tr = propagate(system, &grid, &QuadratureSpec::default()).unwrap();
    for (k, &i) in idx.iter().enumerate() {
        let e1 = (tr.alpha1[k] - oracle[i][0]).norm();
        let e2 = (tr.alpha2[k] - oracle[i][1]).norm();
        assert!(e1 < tol && e2 < tol, "t = {}: errors {e1:.2e}, {e2:.2e}", grid[k]);
    }
}

#[test]
fn identical_qubits_follow_the_delay_series() {
    for (delta, beta, d_tilde) in [(0.9, 1.0, 1.0), (0.5, 0.95, 2.3), (0.0, 0.9, 0.6), (1.0, 1.0, 4.0)] {
        let s = sys(delta, beta, 0.04, d_tilde);
        let dde = DelayEquations::new(&s);
        let t_max = s.delay() + 12.0 / s.slowest_decay();
        let grid: Vec<f64> = (0..=60).map(|k| t_max * k as f64 / 60.0).collect();
        let tr = propagate(&s, &grid, &QuadratureSpec::default()).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let [c1, c2] = dde.series(t);
            assert!((tr.alpha1[k] - c1).norm() < 2e-4, "Δ={delta} t={t}: {} vs {c1}", tr.alpha1[k]);
            assert!((tr.alpha2[k] - c2).norm() < 2e-4, "Δ={delta} t={t}: {} vs {c2}", tr.alpha2[k]);
        }
    }
}

#[test]
fn series_and_method_of_steps_agree() {
    let s = sys(0.6, 0.9, 0.05, 1.7);
    let dde = DelayEquations::new(&s);
    let (h, y) = dde.integrate(400.0, 200);
    for i in (0..y.len()).step_by(97) {
        let [c1, c2] = dde.series(i as f64 * h);
        assert!((y[i][0] - c1).norm() < 1e-10, "t={} {} vs {c1}", i as f64 * h, y[i][0]);
        assert!((y[i][1] - c2).norm() < 1e-10);
    }
}

#[test]
fn detuned_qubits_follow_the_delay_equations() {
    let cfg = SystemConfig::symmetric(0.8, 1.0, 0.04, 1.4).unwrap().with_detuning(0.03);
    let s = cfg.validate().unwrap();
    compare_with_delay_equations(&s, s.delay() + 10.0 / s.slowest_decay(), 1e-4);
}

#[test]
fn lossy_detuned_qubits_follow_the_delay_equations() {
    let cfg = SystemConfig::symmetric(0.3, 0.8, 0.04, 2.2).unwrap().with_detuning(-0.02);
    let s = cfg.validate().unwrap();
    compare_with_delay_equations(&s, s.delay() + 10.0 / s.slowest_decay(), 1e-4);
}

#[test]
fn unequal_qubits_follow_the_delay_equations() {
    let cfg = SystemConfig {
        qubit1: QubitParams::from_targets(1.0, 0.9, 0.95, 0.03, 0.0).unwrap(),
        qubit2: QubitParams::from_targets(1.01, -0.2, 0.85, 0.05, 9.0).unwrap(),
        v_g: 1.0,
        omega0: 1.0,
    };
    let s = cfg.validate().unwrap();
    compare_with_delay_equations(&s, s.delay() + 10.0 / s.slowest_decay(), 1e-4);
}

#[test]
fn box_normalised_overlaps_match_asymptotic_overlaps() {
    // The qubit amplitudes and the inter-qubit segment contribute O(1/L).
    let length = 1e5 * 2.0 * std::f64::consts::PI;
    for (delta, beta, d_tilde) in [(0.9, 1.0, 0.3), (0.4, 0.9, 0.45), (0.0, 0.8, 0.2)] {
        let s = sys(delta, beta, 0.05, d_tilde);
        for energy in [0.97, 1.0, 1.02] {
            let plus = solve_eigenstate(&s, energy, Branch::Plus).unwrap();
            let minus = solve_eigenstate(&s, energy, Branch::Minus).unwrap();
            let m = overlap_matrix(&s, energy).unwrap().entries;
            let pairs = [(&plus, &plus, m[0][0]), (&plus, &minus, m[0][1]), (&minus, &minus, m[1][1])];
            for (a, b, exact) in pairs {
                let boxed = box_overlap(&s, a, b, length, 2_000_000);
                assert!((boxed - exact).norm() < 1e-3, "Δ={delta} ε={energy}: {boxed} vs {exact}");
            }
        }
    }
}

#[test]
fn scattering_reduces_to_markovian_for_slow_decay() {
    let s = sys(0.9, 1.0, 2e-5, 1.0);
    let markov = markovian::cmax_numeric(&s, None).unwrap();
    let (peak, report) = scattering::cmax(&s, None, &QuadratureSpec::default()).unwrap();
    assert!(report.error_estimate() < 1e-4);
    assert!((peak.value - markov.value).abs() < 1e-3, "{} vs {}", peak.value, markov.value);
    assert!((peak.time - markov.time).abs() / markov.time < 1e-2);
}
