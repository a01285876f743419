//! Exact single-excitation dynamics from scattering eigenstates, compared with
//! the Markovian master equation as the coupling grows.
//!
//! ```bash
//! cargo run --release --example retarded_dynamics
//! ```

use chiral_qed::experiments::compare_engines;
use chiral_qed::markovian;
use chiral_qed::scattering::{self, QuadratureSpec};
use chiral_qed::{Result, SystemConfig};

fn main() -> Result<()> {
    let quad = QuadratureSpec::default();
    println!("Δ = 0.9, β = 0.98, d = λ0");
    println!("{:>8} {:>8} {:>12} {:>12} {:>10}", "γ/ω0", "γd/v", "C_max markov", "C_max exact", "sup |ΔC|");
    for gamma in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
        let system = SystemConfig::symmetric(0.9, 0.98, 2.0 * gamma, 1.0)?.validate()?;
        let markov = markovian::cmax_numeric(&system, None)?;
        let (exact, report) = scattering::cmax(&system, None, &quad)?;
        let horizon = 10.0 / gamma;
        let times: Vec<f64> = (0..=100).map(|k| horizon * k as f64 / 100.0).collect();
        let divergence = compare_engines(&system, &times, &quad)?;
        println!(
            "{gamma:>8.0e} {:>8.2e} {:>12.5} {:>12.5} {:>10.2e}   (quadrature: {} nodes, error {:.1e})",
            gamma * system.delay(),
            markov.value,
            exact.value,
            divergence.sup_norm,
            report.nodes,
            report.error_estimate()
        );
    }

    // Amplitudes in the frame rotating at the qubit frequency.
    let system = SystemConfig::symmetric(0.9, 1.0, 0.2, 1.0)?.validate()?;
    let tau = system.delay();
    let times: Vec<f64> = (0..=8).map(|k| k as f64 * tau / 4.0).collect();
    let trace = scattering::propagate(&system, &times, &quad)?;
    println!("\nγ = 0.1, lossless: qubit 2 stays unexcited until t = d/v = {tau:.3}");
    for (i, t) in times.iter().enumerate() {
        println!(
            "  t/τ = {:>4.2}  |α1| = {:.5}  |α2| = {:.5}  C = {:.5}",
            t / tau,
            trace.alpha1[i].norm(),
            trace.alpha2[i].norm(),
            trace.concurrence()[i]
        );
    }
    Ok(())
}
