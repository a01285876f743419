//! Single-photon transmission through one qubit and through a chiral pair.
//!
//! ```bash
//! cargo run --example transmission_spectrum
//! ```

use chiral_qed::scattering::{transmission_spectrum, Branch};
use chiral_qed::{QubitParams, Result, SystemConfig};

fn main() -> Result<()> {
    let gamma = 0.01;
    let single = |gamma_r: f64, gamma_l: f64| SystemConfig {
        qubit1: QubitParams {
            omega: 1.0,
            gamma_r,
            gamma_l,
            gamma_loss: 0.0,
            position: 0.0,
        },
        qubit2: QubitParams::uncoupled(1.0, 10.0),
        v_g: 1.0,
        omega0: 1.0,
    };
    let energies: Vec<f64> = (-4..=4).map(|k| 1.0 + k as f64 * 0.5 * gamma).collect();

    for (label, cfg) in [
        ("non-chiral qubit", single(gamma, gamma)),
        ("chiral qubit (Δ = 0.6)", single(1.6 * gamma, 0.4 * gamma)),
        ("fully chiral qubit", single(2.0 * gamma, 0.0)),
    ] {
        let spectrum = transmission_spectrum(&cfg.validate_single_qubit()?, &energies, Branch::Plus)?;
        println!("{label}");
        for p in spectrum {
            println!("  (ε-Ω)/γ = {:>5.1}   |t| = {:.6}   |r| = {:.6}", (p.energy - 1.0) / gamma, p.t.norm(), p.r.norm());
        }
    }

    let pair = SystemConfig::symmetric(0.9, 0.95, 2.0 * gamma, 0.3)?.validate()?;
    println!("chiral pair, β = 0.95, d = 0.3λ0");
    for branch in [Branch::Plus, Branch::Minus] {
        let p = transmission_spectrum(&pair, &[1.0], branch)?[0];
        println!("  {branch:?}: |t|² = {:.4}, |r|² = {:.4}, lost = {:.4}", p.t.norm_sqr(), p.r.norm_sqr(), p.flux_deficit);
    }
    Ok(())
}
