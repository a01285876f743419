//! TOML configuration with command-line style overrides.
//!
//! ```bash
//! cargo run --example config_overrides
//! ```

use chiral_qed::config;
use chiral_qed::experiments::select_engine;
use chiral_qed::Result;

const PAIR: &str = r#"
v_g = 1.0
omega0 = 1.0

[qubit1]
omega = 1.0
gamma_r = 1.9e-3
gamma_l = 0.1e-3
gamma_loss = 0.0
position = 0.0

[qubit2]
omega = 1.0
gamma_r = 1.9e-3
gamma_l = 0.1e-3
gamma_loss = 0.0
position = 6.283185307179586
"#;

fn main() -> Result<()> {
    let mut cfg = config::parse(PAIR)?;
    let system = cfg.validate()?;
    describe("as written", &system);

    config::apply_overrides(&mut cfg, &["beta=0.9".into(), "d_tilde=0.25".into(), "qubit2.omega=1.002".into()])?;
    describe("beta=0.9 d_tilde=0.25 qubit2.omega=1.002", &cfg.validate()?);

    let err = config::apply_overrides(&mut cfg, &["qubit1.gamma=1".into()]).unwrap_err();
    println!("rejected: {err}");
    println!("\n{}", config::to_toml(&cfg));
    Ok(())
}

fn describe(label: &str, system: &chiral_qed::System) {
    let d = system.derived();
    println!("{label}");
    for (j, q) in d.qubits.iter().enumerate() {
        println!("  qubit{}: γ = {:.3e}, Δ = {:.3}, β = {:.3}", j + 1, q.gamma, q.delta, q.beta);
    }
    println!("  d = {:.3}λ0, q = {:.4}, auto engine: {}", d.d_tilde, d.q, select_engine(system));
}
