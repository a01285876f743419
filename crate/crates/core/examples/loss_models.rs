//! The two treatments of external loss in the eigenstate expansion.
//!
//! With reservoir channels the expansion is complete and the amplitude starts
//! at 1; restricting it to the waveguide branches loses part of the initial
//! state.
//!
//! ```bash
//! cargo run --release --example loss_models
//! ```

use chiral_qed::scattering::{propagate, LossModel, QuadratureSpec};
use chiral_qed::{QubitParams, Result, SystemConfig};

fn main() -> Result<()> {
    let (gamma_r, loss) = (0.02, 0.01);
    let cfg = SystemConfig {
        qubit1: QubitParams {
            omega: 1.0,
            gamma_r,
            gamma_l: 0.0,
            gamma_loss: loss,
            position: 0.0,
        },
        qubit2: QubitParams::uncoupled(1.0, 10.0),
        v_g: 1.0,
        omega0: 1.0,
    };
    let system = cfg.validate_single_qubit()?;
    let times: Vec<f64> = (0..=5).map(|k| k as f64 * 20.0).collect();
    for model in [LossModel::ReservoirChannels, LossModel::WaveguideOverlap] {
        let quad = QuadratureSpec {
            loss_model: model,
            verify: false,
            ..QuadratureSpec::default()
        };
        let trace = propagate(&system, &times, &quad)?;
        println!("{model:?}");
        for (t, p) in times.iter().zip(&trace.survival) {
            println!("  t = {t:>5.1}  |α1|² = {p:.6}  exact e^(-(γR+Γ)t) = {:.6}", (-(gamma_r + loss) * t).exp());
        }
    }
    Ok(())
}
