//! Markovian concurrence after exciting qubit 1, for a few directionalities.
//!
//! ```bash
//! cargo run --example markov_trace
//! ```

use chiral_qed::markovian::{self, concurrence};
use chiral_qed::{Result, SystemConfig};

fn main() -> Result<()> {
    let gamma_t: Vec<f64> = (0..=12).map(|k| k as f64 * 0.5).collect();
    print!("{:>6}", "γt");
    let deltas = [0.0, 0.5, 0.9, 1.0];
    for d in deltas {
        print!("  Δ={d:<7}");
    }
    println!();

    let mut columns = Vec::new();
    for delta in deltas {
        let system = SystemConfig::symmetric(delta, 1.0, 2e-5, 1.0)?.validate()?;
        let times: Vec<f64> = gamma_t.iter().map(|x| x / system.max_gamma()).collect();
        let states = markovian::evolve(&system, &times)?;
        // The closed form covers equal, lossless, resonant qubits.
        for (s, &t) in states.iter().zip(&times) {
            assert!((concurrence(s) - markovian::concurrence_analytic(&system, t)?).abs() < 1e-8);
        }
        columns.push(states.iter().map(concurrence).collect::<Vec<_>>());
    }
    for (i, gt) in gamma_t.iter().enumerate() {
        print!("{gt:>6.1}");
        for c in &columns {
            print!("  {:<9.5}", c[i]);
        }
        println!();
    }

    let chiral = SystemConfig::symmetric(1.0, 1.0, 2e-5, 1.0)?.validate()?;
    let peak = markovian::cmax_numeric(&chiral, None)?;
    println!(
        "\nfully chiral: C_max = {:.6} at γt = {:.4} (2/e = {:.6})",
        peak.value,
        peak.time * chiral.max_gamma(),
        2.0 / std::f64::consts::E
    );
    Ok(())
}
