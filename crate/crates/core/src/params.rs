//! Parameter model and the directionality / beta-factor algebra.
//!
//! Everything downstream works with a validated [`System`]. Rates are angular
//! frequencies; the conventional unit system is `omega0 = 1`, `v_g = 1`, so
//! the emission wavelength is `2π` and every rate is expressed in units of
//! `omega0`. "Right" means toward larger `position`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One emitter: transition frequency, chiral waveguide couplings, external
/// loss and position along the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub omega: f64,
    /// Decay rate into right-propagating guided photons.
    pub gamma_r: f64,
    /// Decay rate into left-propagating guided photons.
    pub gamma_l: f64,
    /// Decay rate into free space and other lossy modes.
    pub gamma_loss: f64,
    pub position: f64,
}

impl QubitParams {
    /// Builds a qubit from directionality, beta factor and total guided rate
    /// `gamma_r + gamma_l`.
    pub fn from_targets(
        omega: f64,
        delta: f64,
        beta: f64,
        gamma_total: f64,
        position: f64,
    ) -> Result<Self> {
        let (gamma_r, gamma_l, gamma_loss) = couplings_from_targets(delta, beta, gamma_total)?;
        Ok(QubitParams {
            omega,
            gamma_r,
            gamma_l,
            gamma_loss,
            position,
        })
    }

    /// A qubit that does not interact with anything. Only accepted by
    /// [`SystemConfig::validate_single_qubit`].
    pub fn uncoupled(omega: f64, position: f64) -> Self {
        QubitParams {
            omega,
            gamma_r: 0.0,
            gamma_l: 0.0,
            gamma_loss: 0.0,
            position,
        }
    }

    /// Half the total guided rate, `(gamma_r + gamma_l) / 2`.
    pub fn gamma(&self) -> f64 {
        (self.gamma_r + self.gamma_l) / 2.0
    }

    /// Amplitude decay rate of the isolated qubit, `gamma + gamma_loss / 2`.
    pub fn amplitude_decay(&self) -> f64 {
        self.gamma() + self.gamma_loss / 2.0
    }

    /// The same qubit seen in a mirror: right and left couplings exchanged.
    pub fn mirrored(&self) -> Self {
        QubitParams {
            gamma_r: self.gamma_l,
            gamma_l: self.gamma_r,
            position: -self.position,
            ..*self
        }
    }
}

/// Two qubits plus the waveguide. Qubit 1 is the left qubit and the one that
/// is initially excited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub qubit1: QubitParams,
    pub qubit2: QubitParams,
    pub v_g: f64,
    pub omega0: f64,
}

/// Per-qubit derived rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitRates {
    /// `(gamma_r + gamma_l) / 2`.
    pub gamma: f64,
    /// Directionality; 0 for an uncoupled qubit.
    pub delta: f64,
    /// Coupling fraction; 0 for an uncoupled qubit.
    pub beta: f64,
    pub coupled: bool,
}

/// Quantities derived once at validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub qubits: [QubitRates; 2],
    /// `((1 - Δ₁²)(1 - Δ₂²))^(1/4)`.
    pub q: f64,
    /// Emission wavelength `2π v_g / omega0`.
    pub lambda0: f64,
    /// Qubit separation `x₂ - x₁`.
    pub separation: f64,
    /// Separation in units of the emission wavelength.
    pub d_tilde: f64,
}

/// A configuration whose invariants have been checked, with its derived
/// quantities cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    config: SystemConfig,
    derived: DerivedRates,
}

/// `(gamma_r - gamma_l) / (gamma_r + gamma_l)`.
pub fn directionality(gamma_r: f64, gamma_l: f64) -> Result<f64> {
    let total = gamma_r + gamma_l;
    if !(total > 0.0) {
        return Err(Error::Domain(
            "uncoupled qubit has no directionality".to_string(),
        ));
    }
    Ok(((gamma_r - gamma_l) / total).clamp(-1.0, 1.0))
}

/// Fraction of the total decay that goes into guided modes.
pub fn beta_factor(gamma_r: f64, gamma_l: f64, gamma_loss: f64) -> Result<f64> {
    let guided = gamma_r + gamma_l;
    let total = guided + gamma_loss;
    if !(total > 0.0) {
        return Err(Error::Domain(
            "beta factor undefined for a qubit with no decay channel".to_string(),
        ));
    }
    Ok((guided / total).clamp(0.0, 1.0))
}

/// Inverse of ([`directionality`], [`beta_factor`], `gamma_r + gamma_l`):
/// returns `(gamma_r, gamma_l, gamma_loss)`.
pub fn couplings_from_targets(delta: f64, beta: f64, gamma_total: f64) -> Result<(f64, f64, f64)> {
    if !(-1.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("directionality {delta} outside [-1, 1]")));
    }
    if beta == 0.0 {
        return Err(Error::Domain("beta = 0 implies infinite loss".to_string()));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta factor {beta} outside (0, 1]")));
    }
    if !(gamma_total > 0.0 && gamma_total.is_finite()) {
        return Err(Error::Domain(format!("total guided rate {gamma_total} must be positive")));
    }
    let gamma_r = gamma_total * (1.0 + delta) / 2.0;
    let gamma_l = gamma_total * (1.0 - delta) / 2.0;
    let gamma_loss = gamma_total * (1.0 - beta) / beta;
    Ok((gamma_r, gamma_l, gamma_loss))
}

/// `((1 - Δ₁²)(1 - Δ₂²))^(1/4)`, clamped into `[0, 1]`.
pub fn q_factor(delta1: f64, delta2: f64) -> f64 {
    let a = (1.0 - delta1 * delta1).max(0.0);
    let b = (1.0 - delta2 * delta2).max(0.0);
    (a.sqrt() * b.sqrt()).sqrt().min(1.0)
}

impl SystemConfig {
    /// Identical qubits in natural units (`omega0 = v_g = 1`): qubit 1 at the
    /// origin, qubit 2 at `2π · d_tilde`.
    pub fn symmetric(delta: f64, beta: f64, gamma_total: f64, d_tilde: f64) -> Result<Self> {
        let x2 = 2.0 * PI * d_tilde;
        Ok(SystemConfig {
            qubit1: QubitParams::from_targets(1.0, delta, beta, gamma_total, 0.0)?,
            qubit2: QubitParams::from_targets(1.0, delta, beta, gamma_total, x2)?,
            v_g: 1.0,
            omega0: 1.0,
        })
    }

    /// Shifts the qubit frequencies to `omega0 ± detuning / 2`.
    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.qubit1.omega = self.omega0 + detuning / 2.0;
        self.qubit2.omega = self.omega0 - detuning / 2.0;
        self
    }

    /// Mirror image with relabelled qubits: the old qubit 2 becomes the new
    /// (left) qubit 1 and right/left couplings are exchanged.
    pub fn mirrored(&self) -> Self {
        SystemConfig {
            qubit1: self.qubit2.mirrored(),
            qubit2: self.qubit1.mirrored(),
            v_g: self.v_g,
            omega0: self.omega0,
        }
    }

    pub fn validate(&self) -> Result<System> {
        self.validate_inner(false)
    }

    /// Like [`validate`](Self::validate) but accepts a qubit with no decay
    /// channel at all. Used for single-emitter scattering checks.
    pub fn validate_single_qubit(&self) -> Result<System> {
        self.validate_inner(true)
    }

    fn validate_inner(&self, allow_uncoupled: bool) -> Result<System> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::validation("omega0", "must be positive and finite"));
        }
        if !(self.v_g > 0.0 && self.v_g.is_finite()) {
            return Err(Error::validation("v_g", "must be positive and finite"));
        }
        let mut rates = [QubitRates {
            gamma: 0.0,
            delta: 0.0,
            beta: 0.0,
            coupled: false,
        }; 2];
        let mut uncoupled = 0;
        for (i, qb) in [&self.qubit1, &self.qubit2].into_iter().enumerate() {
            let name = format!("qubit{}", i + 1);
            if !(qb.omega > 0.0 && qb.omega.is_finite()) {
                return Err(Error::validation(format!("{name}.omega"), "must be positive and finite"));
            }
            if !qb.position.is_finite() {
                return Err(Error::validation(format!("{name}.position"), "must be finite"));
            }
            for (field, value) in [
                ("gamma_r", qb.gamma_r),
                ("gamma_l", qb.gamma_l),
                ("gamma_loss", qb.gamma_loss),
            ] {
                if !value.is_finite() {
                    return Err(Error::validation(format!("{name}.{field}"), "must be finite"));
                }
                if value < 0.0 {
                    return Err(Error::validation(format!("{name}.{field}"), "negative rate"));
                }
            }
            let guided = qb.gamma_r + qb.gamma_l;
            let coupled = guided + qb.gamma_loss > 0.0;
            if !coupled {
                if !allow_uncoupled {
                    return Err(Error::validation(
                        name,
                        "qubit has no decay channel (all rates zero)",
                    ));
                }
                uncoupled += 1;
                continue;
            }
            rates[i] = QubitRates {
                gamma: guided / 2.0,
                delta: if guided > 0.0 { directionality(qb.gamma_r, qb.gamma_l)? } else { 0.0 },
                beta: beta_factor(qb.gamma_r, qb.gamma_l, qb.gamma_loss)?,
                coupled: true,
            };
        }
        if uncoupled == 2 {
            return Err(Error::validation("qubit1", "both qubits are uncoupled"));
        }
        if !(self.qubit2.position > self.qubit1.position) {
            return Err(Error::validation(
                "qubit2.position",
                "qubit ordering: qubit 2 must lie to the right of qubit 1",
            ));
        }
        let lambda0 = 2.0 * PI * self.v_g / self.omega0;
        let separation = self.qubit2.position - self.qubit1.position;
        let derived = DerivedRates {
            q: q_factor(rates[0].delta, rates[1].delta),
            qubits: rates,
            lambda0,
            separation,
            d_tilde: separation / lambda0,
        };
        Ok(System {
            config: *self,
            derived,
        })
    }
}

impl System {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn derived(&self) -> &DerivedRates {
        &self.derived
    }

    pub fn qubit(&self, index: usize) -> &QubitParams {
        match index {
            0 => &self.config.qubit1,
            1 => &self.config.qubit2,
            _ => panic!("qubit index {index} out of range"),
        }
    }

    pub fn d_tilde(&self) -> f64 {
        self.derived.d_tilde
    }

    /// Phase `2π d̃` accumulated by a guided photon at the reference
    /// frequency between the two qubits.
    pub fn propagation_phase(&self) -> f64 {
        2.0 * PI * self.derived.d_tilde
    }

    /// Time of flight between the qubits, `d / v_g`.
    pub fn delay(&self) -> f64 {
        self.derived.separation / self.config.v_g
    }

    /// `omega1 - omega2`.
    pub fn detuning(&self) -> f64 {
        self.config.qubit1.omega - self.config.qubit2.omega
    }

    /// Slowest amplitude decay among coupled qubits, `min_j (gamma_j + Γ_j / 2)`.
    pub fn slowest_decay(&self) -> f64 {
        [&self.config.qubit1, &self.config.qubit2]
            .iter()
            .map(|qb| qb.amplitude_decay())
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest per-qubit `gamma_j`.
    pub fn max_gamma(&self) -> f64 {
        self.derived.qubits[0].gamma.max(self.derived.qubits[1].gamma)
    }

    pub fn is_lossless(&self) -> bool {
        self.config.qubit1.gamma_loss == 0.0 && self.config.qubit2.gamma_loss == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn directionality_examples() {
        assert_eq!(directionality(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(directionality(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(directionality(0.95, 0.05).unwrap(), 0.90, epsilon = 1e-15);
        assert!(matches!(directionality(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_factor(0.5, 0.5, 0.0).unwrap(), 1.0);
        assert_eq!(beta_factor(0.5, 0.5, 1.0).unwrap(), 0.5);
        // Γ = 2γ(1 - β)/β with 2γ = 1 and β = 0.98.
        assert_relative_eq!(beta_factor(0.5, 0.5, 0.0204081633).unwrap(), 0.98, epsilon = 1e-10);
        assert!(beta_factor(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn targets_examples() {
        assert_eq!(couplings_from_targets(0.0, 1.0, 1.0).unwrap(), (0.5, 0.5, 0.0));
        assert_eq!(couplings_from_targets(1.0, 1.0, 1.0).unwrap(), (1.0, 0.0, 0.0));
        let (r, l, loss) = couplings_from_targets(0.9, 0.98, 1.0).unwrap();
        assert_relative_eq!(r, 0.95, epsilon = 1e-15);
        assert_relative_eq!(l, 0.05, epsilon = 1e-15);
        assert_relative_eq!(loss, 0.0204081633, epsilon = 1e-10);
        assert!(matches!(couplings_from_targets(0.5, 0.0, 1.0), Err(Error::Domain(_))));
    }

    fn base() -> SystemConfig {
        SystemConfig::symmetric(0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn ordering_is_enforced() {
        let mut cfg = base();
        cfg.qubit2.position = -1.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("qubit ordering"), "{err}");
    }

    #[test]
    fn negative_rate_rejected() {
        let mut cfg = base();
        cfg.qubit1.gamma_r = -0.1;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("negative rate"), "{err}");
        assert!(err.to_string().contains("qubit1.gamma_r"), "{err}");
    }

    #[test]
    fn d_tilde_from_geometry() {
        let mut cfg = base();
        cfg.qubit1.position = 0.0;
        cfg.qubit2.position = 2.0 * PI;
        let sys = cfg.validate().unwrap();
        assert_relative_eq!(sys.derived().lambda0, 2.0 * PI);
        assert_relative_eq!(sys.d_tilde(), 1.0);
    }

    #[test]
    fn uncoupled_only_when_flagged() {
        let mut cfg = base();
        cfg.qubit2 = QubitParams::uncoupled(1.0, 3.0);
        assert!(cfg.validate().is_err());
        let sys = cfg.validate_single_qubit().unwrap();
        assert!(!sys.derived().qubits[1].coupled);
        assert_eq!(sys.derived().q, 1.0);
    }

    #[test]
    fn validation_is_deterministic() {
        let cfg = SystemConfig::symmetric(0.37, 0.93, 0.011, 2.3).unwrap();
        assert_eq!(cfg.validate().unwrap(), cfg.validate().unwrap());
    }

    #[test]
    fn mirror_swaps_couplings() {
        let cfg = SystemConfig::symmetric(0.5, 1.0, 1.0, 1.0).unwrap();
        let m = cfg.mirrored();
        assert_eq!(m.qubit1.gamma_r, cfg.qubit2.gamma_l);
        assert_eq!(m.qubit2.gamma_l, cfg.qubit1.gamma_r);
        let sys = m.validate().unwrap();
        assert_relative_eq!(sys.d_tilde(), 1.0);
    }
}
