//! Peak concurrence against qubit detuning, chiral versus non-chiral.
//!
//! ```bash
//! cargo run --release --example detuning_sweep
//! ```

use chiral_qed::experiments::{run_sweep, Axis, AxisGrid, Engine, SweepSpec};
use chiral_qed::{Result, SystemConfig};

fn main() -> Result<()> {
    let gamma = 1e-3;
    let ratios = AxisGrid::log(Axis::Detuning, 0.05, 20.0, 9);
    let detuning = AxisGrid {
        axis: Axis::Detuning,
        values: ratios.values.iter().map(|r| r * gamma).collect(),
    };
    let chiral = SweepSpec::custom(
        SystemConfig::symmetric(0.9, 0.98, 2.0 * gamma, 1.0)?,
        vec![detuning.clone()],
        Engine::Auto,
    );
    let plain = SweepSpec::custom(
        SystemConfig::symmetric(0.0, 0.98, 2.0 * gamma, 1.0)?,
        vec![detuning],
        Engine::Markovian,
    );
    let a = run_sweep(&chiral)?;
    let b = run_sweep(&plain)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "δ/γ", "Δ = 0.9", "engine", "Δ = 0");
    for (x, y) in a.records.iter().zip(&b.records) {
        println!(
            "{:>8.3} {:>12.4} {:>12} {:>12.4}",
            x.coords[0] / gamma,
            x.c_max.unwrap_or(f64::NAN),
            x.engine.to_string(),
            y.c_max.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
