//! Detecting the trapped photon mode between two non-chiral qubits and how it
//! steers engine selection.
//!
//! ```bash
//! cargo run --example localized_resonance
//! ```

use chiral_qed::experiments::select_engine;
use chiral_qed::scattering::{self, localized_state_exists, QuadratureSpec};
use chiral_qed::{Result, SystemConfig};

fn main() -> Result<()> {
    for (delta, d_tilde) in [(0.0, 1.0), (0.0, 1.5), (0.0, 1.0 + 1e-9), (0.0, 1.2), (0.3, 1.0)] {
        let system = SystemConfig::symmetric(delta, 1.0, 2e-3, d_tilde)?.validate()?;
        let check = localized_state_exists(&system);
        println!(
            "Δ = {delta}, d = {d_tilde}λ0: exists = {}, near = {}, engine = {}\n    {}",
            check.exists,
            check.near,
            select_engine(&system),
            check.diagnostic
        );
    }
    let trapped = SystemConfig::symmetric(0.0, 1.0, 2e-3, 1.0)?.validate()?;
    match scattering::propagate(&trapped, &[0.0], &QuadratureSpec::default()) {
        Ok(_) => println!("unexpected: propagated"),
        Err(e) => println!("scattering refused: {e}"),
    }
    Ok(())
}
