//! Markovian dynamics of the two-qubit reduced state.
//!
//! For a single initial excitation the density matrix only has the
//! populations `ρ₀₀, ρ₁₁, ρ₂₂` and the coherence `ρ₁₂` (`ρ₃₃ ≡ 0`), so the
//! chiral master equation reduces to three coupled equations. The frame
//! rotates at the mean qubit frequency; detuning `δ = ω₁ - ω₂` enters the
//! coherence as `-iδρ₁₂`, and the losses `Γ_j` act as independent amplitude
//! decay channels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerances};
use crate::params::System;
use crate::peak::{self, Peak};

/// Non-zero density-matrix elements at time `t`, in the basis
/// `{|0⟩, σ₁†|0⟩, σ₂†|0⟩, σ₁†σ₂†|0⟩}`. `rho12 = ⟨1|ρ|2⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    pub rho00: f64,
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
}

/// Time derivative of a [`ReducedState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub rho00: f64,
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: Complex64,
}

/// Which qubit carries the excitation at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Excitation {
    #[default]
    Qubit1,
    Qubit2,
}

impl ReducedState {
    pub fn excited(which: Excitation) -> Self {
        let (rho11, rho22) = match which {
            Excitation::Qubit1 => (1.0, 0.0),
            Excitation::Qubit2 => (0.0, 1.0),
        };
        ReducedState {
            t: 0.0,
            rho00: 0.0,
            rho11,
            rho22,
            rho12: Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11 + self.rho22
    }

    fn to_vec(self) -> [f64; 5] {
        [self.rho00, self.rho11, self.rho22, self.rho12.re, self.rho12.im]
    }

    fn from_vec(t: f64, y: &[f64; 5]) -> Self {
        ReducedState {
            t,
            rho00: y[0],
            rho11: y[1],
            rho22: y[2],
            rho12: Complex64::new(y[3], y[4]),
        }
    }
}

/// Sampled concurrence with its located maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub c_max: f64,
    pub t_star: f64,
}

impl ConcurrenceTrace {
    /// Builds a trace whose maximum is the largest sample.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>) -> Self {
        let (c_max, t_star) = times
            .iter()
            .zip(&values)
            .fold((f64::NEG_INFINITY, 0.0), |acc, (&t, &c)| if c > acc.0 { (c, t) } else { acc });
        ConcurrenceTrace {
            times,
            values,
            c_max,
            t_star,
        }
    }
}

/// Coupling constants of the reduced equations, precomputed once per system.
#[derive(Debug, Clone, Copy)]
struct Couplings {
    decay1: f64,
    decay2: f64,
    /// `√(γ₁R γ₂R)`: photons travelling from qubit 1 to qubit 2.
    right: f64,
    /// `√(γ₁L γ₂L)`: photons travelling from qubit 2 to qubit 1.
    left: f64,
    phase: Complex64,
    detuning: f64,
}

impl Couplings {
    fn new(system: &System) -> Self {
        let (q1, q2) = (system.qubit(0), system.qubit(1));
        Couplings {
            decay1: q1.gamma_r + q1.gamma_l + q1.gamma_loss,
            decay2: q2.gamma_r + q2.gamma_l + q2.gamma_loss,
            right: (q1.gamma_r * q2.gamma_r).sqrt(),
            left: (q1.gamma_l * q2.gamma_l).sqrt(),
            phase: Complex64::from_polar(1.0, system.propagation_phase()),
            detuning: system.detuning(),
        }
    }

    fn rate(&self, rho11: f64, rho22: f64, rho12: Complex64) -> StateRate {
        let rho21 = rho12.conj();
        let e = self.phase;
        let ec = e.conj();
        let d11 = -self.decay1 * rho11 - self.left * (e * rho21 + ec * rho12).re;
        let d22 = -self.decay2 * rho22 - self.right * (e * rho12 + ec * rho21).re;
        let d12 = -Complex64::new((self.decay1 + self.decay2) / 2.0, self.detuning) * rho12
            - self.right * rho11 * ec
            - self.left * rho22 * e;
        StateRate {
            rho00: -(d11 + d22),
            rho11: d11,
            rho22: d22,
            rho12: d12,
        }
    }
}

/// Right-hand side of the reduced master equation.
pub fn master_rhs(state: &ReducedState, system: &System) -> StateRate {
    Couplings::new(system).rate(state.rho11, state.rho22, state.rho12)
}

/// Evolves `ρ(0) = σ₁†|0⟩⟨0|σ₁` and samples the state on `t_grid`.
pub fn evolve(system: &System, t_grid: &[f64]) -> Result<Vec<ReducedState>> {
    evolve_with(system, Excitation::Qubit1, t_grid, Tolerances::default())
}

/// [`evolve`] with an explicit initial excitation and tolerances.
pub fn evolve_with(
    system: &System,
    initial: Excitation,
    t_grid: &[f64],
    tol: Tolerances,
) -> Result<Vec<ReducedState>> {
    match t_grid.first() {
        None => return Ok(Vec::new()),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::Precondition(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    let couplings = Couplings::new(system);
    let rhs = move |_t: f64, y: &[f64; 5]| {
        let r = couplings.rate(y[1], y[2], Complex64::new(y[3], y[4]));
        [r.rho00, r.rho11, r.rho22, r.rho12.re, r.rho12.im]
    };
    let y0 = ReducedState::excited(initial).to_vec();
    let ys = Dopri5::new(tol).integrate(rhs, 0.0, y0, t_grid).map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "master equation integration failed (d̃ = {}, rates {:?}): {msg}",
            system.d_tilde(),
            system.derived().qubits
        )),
        other => other,
    })?;
    Ok(t_grid
        .iter()
        .zip(&ys)
        .map(|(&t, y)| ReducedState::from_vec(t, y))
        .collect())
}

/// State at a single time `t`.
fn state_at(system: &System, initial: Excitation, t: f64, tol: Tolerances) -> Result<ReducedState> {
    Ok(evolve_with(system, initial, &[0.0, t], tol)?[1])
}

/// Wootters concurrence of the reduced state, `2|ρ₁₂|` clipped to `[0, 1]`.
pub fn concurrence(state: &ReducedState) -> f64 {
    (2.0 * state.rho12.norm()).clamp(0.0, 1.0)
}

/// Below this `|z|` the closed form switches to its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-3;

/// `|sinh(z)| / |z|`, with `sinh(0)/0 = 1`.
fn abs_sinhc(z: Complex64) -> f64 {
    if z.norm() < SERIES_SWITCH {
        let z2 = z * z;
        (1.0 + z2 / 6.0 + z2 * z2 / 120.0).norm()
    } else {
        z.sinh().norm() / z.norm()
    }
}

/// Closed-form concurrence for equally coupled, lossless, resonant qubits.
pub fn concurrence_analytic(system: &System, t: f64) -> Result<f64> {
    let [r1, r2] = system.derived().qubits;
    let gamma = r1.gamma;
    if (r1.gamma - r2.gamma).abs() > 1e-12 * gamma.max(r2.gamma) {
        return Err(Error::Precondition(
            "closed form needs equal couplings γ₁ = γ₂; use markovian::evolve".into(),
        ));
    }
    if !system.is_lossless() {
        return Err(Error::Precondition(
            "closed form needs β = 1 (no external loss); use markovian::evolve".into(),
        ));
    }
    if system.detuning().abs() > 1e-12 * system.config().omega0 {
        return Err(Error::Precondition(
            "closed form needs identical qubit frequencies; use markovian::evolve".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time {t} must be non-negative")));
    }
    let q = system.derived().q;
    let prefactor = ((1.0 + r1.delta) * (1.0 + r2.delta)).sqrt();
    let gt = gamma * t;
    let z = Complex64::from_polar(2.0 * q * gt, system.propagation_phase());
    let envelope = if z.norm() < SERIES_SWITCH || q == 0.0 {
        (-2.0 * gt).exp() * 2.0 * gt * abs_sinhc(z)
    } else {
        // e^{-2γt}|sinh z| / q, written to avoid overflow of sinh at large γt.
        let decay = Complex64::new(-2.0 * gt, 0.0);
        ((z + decay).exp() - (-z + decay).exp()).norm() / (2.0 * q)
    };
    Ok((prefactor * envelope).clamp(0.0, 1.0))
}

/// Maximum concurrence over time at separations with `2d̃` integer, for
/// equally coupled lossless qubits with directionalities `Δ₁, Δ₂`.
pub fn cmax_analytic(delta1: f64, delta2: f64) -> Result<f64> {
    for d in [delta1, delta2] {
        if !(-1.0..=1.0).contains(&d) {
            return Err(Error::Domain(format!("directionality {d} outside [-1, 1]")));
        }
    }
    let weight = (1.0 + delta1) * (1.0 + delta2);
    if weight == 0.0 {
        return Ok(0.0);
    }
    let q = crate::params::q_factor(delta1, delta2);
    // ((1-q)/(1+q))^(1/q) / (1 - q²) = exp[(1-q)/q·ln(1-q) - (1+q)/q·ln(1+q)]
    let ratio = if q >= 1.0 {
        0.25
    } else if q < 1e-4 {
        (-2.0 + q * q / 3.0).exp()
    } else {
        (((1.0 - q) / q) * (-q).ln_1p() - ((1.0 + q) / q) * q.ln_1p()).exp()
    };
    Ok((weight * ratio).sqrt().min(1.0))
}

/// Default search horizon, `20 / γ_min`.
pub fn default_horizon(system: &System) -> f64 {
    20.0 / system.slowest_decay()
}

/// Numerical maximum of the Markovian concurrence over `[0, t_horizon]`.
pub fn cmax_numeric(system: &System, t_horizon: Option<f64>) -> Result<Peak> {
    cmax_numeric_with(system, t_horizon, Tolerances::default())
}

pub fn cmax_numeric_with(system: &System, t_horizon: Option<f64>, tol: Tolerances) -> Result<Peak> {
    let horizon = t_horizon.unwrap_or_else(|| default_horizon(system));
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("search horizon {horizon} must be positive")));
    }
    let grid = peak::log_dense_grid(horizon, peak::COARSE_POINTS);
    let states = evolve_with(system, Excitation::Qubit1, &grid, tol)?;
    let values: Vec<f64> = states.iter().map(concurrence).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    // Restart the refinement evaluations from the sample left of the bracket.
    let anchor = states[best.saturating_sub(1)];
    let couplings = Couplings::new(system);
    let solver = Dopri5::new(tol);
    let eval = |t: f64| -> Result<f64> {
        if t == anchor.t {
            return Ok(concurrence(&anchor));
        }
        if t < anchor.t {
            return Ok(concurrence(&state_at(system, Excitation::Qubit1, t, tol)?));
        }
        let y = solver.advance(
            |_, y: &[f64; 5]| {
                let r = couplings.rate(y[1], y[2], Complex64::new(y[3], y[4]));
                [r.rho00, r.rho11, r.rho22, r.rho12.re, r.rho12.im]
            },
            anchor.t,
            anchor.to_vec(),
            t,
        )?;
        Ok(concurrence(&ReducedState::from_vec(t, &y)))
    };
    peak::refine_maximum(&grid, &values, eval)
}

/// Concurrence trace on `t_grid` plus a refined maximum over the same span.
pub fn concurrence_trace(system: &System, t_grid: &[f64]) -> Result<ConcurrenceTrace> {
    let states = evolve(system, t_grid)?;
    let values = states.iter().map(concurrence).collect();
    Ok(ConcurrenceTrace::from_samples(t_grid.to_vec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemConfig;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn sys(delta: f64, beta: f64, gamma_total: f64, d_tilde: f64) -> System {
        SystemConfig::symmetric(delta, beta, gamma_total, d_tilde)
            .unwrap()
            .validate()
            .unwrap()
    }

    #[test]
    fn rhs_from_excited_qubit_one() {
        // γ = 0.3: γ_R = γ_L = 0.3, so √(γ₁Rγ₂R) = γ.
        let s = sys(0.0, 1.0, 0.6, 1.0);
        let r = master_rhs(&ReducedState::excited(Excitation::Qubit1), &s);
        assert_relative_eq!(r.rho11, -0.6, epsilon = 1e-15);
        assert_relative_eq!(r.rho12.re, -0.3, epsilon = 1e-12);
        assert!(r.rho12.im.abs() < 1e-12);
        assert_relative_eq!(r.rho00, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn rhs_of_vacuum_is_zero() {
        let s = sys(0.4, 0.9, 1.0, 0.3);
        let vac = ReducedState {
            t: 0.0,
            rho00: 1.0,
            rho11: 0.0,
            rho22: 0.0,
            rho12: Complex64::new(0.0, 0.0),
        };
        let r = master_rhs(&vac, &s);
        assert_eq!((r.rho00, r.rho11, r.rho22), (0.0, 0.0, 0.0));
        assert_eq!(r.rho12, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fully_right_directional_has_no_feedback() {
        let s = sys(1.0, 1.0, 2.0, 0.37);
        let mut st = ReducedState::excited(Excitation::Qubit1);
        st.rho12 = Complex64::new(0.2, -0.1);
        let r = master_rhs(&st, &s);
        assert_relative_eq!(r.rho11, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn concurrence_examples() {
        let mut st = ReducedState::excited(Excitation::Qubit1);
        assert_eq!(concurrence(&st), 0.0);
        st.rho12 = Complex64::new(0.25, 0.0);
        assert_eq!(concurrence(&st), 0.5);
        st.rho12 = Complex64::new(0.3, 0.1);
        assert_relative_eq!(concurrence(&st), 0.632_455_532_033_675_9, epsilon = 1e-15);
    }

    #[test]
    fn analytic_limits() {
        let s = sys(0.0, 1.0, 1.0, 1.0);
        assert_eq!(concurrence_analytic(&s, 0.0).unwrap(), 0.0);
        let gamma = 0.5;
        assert_relative_eq!(concurrence_analytic(&s, 60.0 / gamma).unwrap(), 0.5, epsilon = 1e-12);
        let chiral = sys(1.0, 1.0, 1.0, 0.3);
        assert_relative_eq!(
            concurrence_analytic(&chiral, 1.0 / (2.0 * gamma)).unwrap(),
            2.0 / E,
            epsilon = 1e-14
        );
    }

    #[test]
    fn analytic_rejects_unequal_couplings() {
        let mut cfg = SystemConfig::symmetric(0.2, 1.0, 1.0, 1.0).unwrap();
        cfg.qubit2.gamma_r *= 1.5;
        let s = cfg.validate().unwrap();
        assert!(matches!(concurrence_analytic(&s, 1.0), Err(Error::Precondition(_))));
        let lossy = sys(0.2, 0.9, 1.0, 1.0);
        assert!(matches!(concurrence_analytic(&lossy, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn cmax_examples() {
        assert_relative_eq!(cmax_analytic(1.0, 1.0).unwrap(), 2.0 / E, epsilon = 1e-15);
        assert_relative_eq!(cmax_analytic(0.0, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        for d2 in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(cmax_analytic(-1.0, d2).unwrap(), 0.0);
        }
        assert!(cmax_analytic(1.2, 0.0).is_err());
    }

    #[test]
    fn cmax_branches_join_smoothly() {
        // Direct form just above the small-q switch vs the series just below.
        let d = (1.0 - 1e-16f64).sqrt();
        let tiny = cmax_analytic(d, d).unwrap();
        assert_relative_eq!(tiny, 2.0 / E, epsilon = 1e-7);
        let near_one = cmax_analytic(1e-4, 1e-4).unwrap();
        assert_relative_eq!(near_one, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn t_star_matches_artanh_formula() {
        let gamma_total = 0.8;
        let gamma = gamma_total / 2.0;
        for delta in [0.3f64, 0.6, 0.9] {
            let s = sys(delta, 1.0, gamma_total, 1.0);
            let q = s.derived().q;
            let p = cmax_numeric(&s, None).unwrap();
            let t_star = q.atanh() / (2.0 * q * gamma);
            assert_relative_eq!(p.time, t_star, max_relative = 1e-4);
            assert_relative_eq!(p.value, cmax_analytic(delta, delta).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn dead_channel() {
        let mut cfg = SystemConfig::symmetric(0.5, 1.0, 1.0, 1.0).unwrap();
        cfg.qubit1 = crate::params::QubitParams::from_targets(1.0, -1.0, 1.0, 1.0, 0.0).unwrap();
        let s = cfg.validate().unwrap();
        let p = cmax_numeric(&s, None).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn lossy_trace_decays() {
        let s = sys(0.0, 0.9, 1.0, 1.0);
        let states = evolve(&s, &[0.0, 10.0, 100.0, 200.0]).unwrap();
        assert!(concurrence(&states[3]) < 1e-3);
    }

    #[test]
    fn grid_must_start_at_zero() {
        let s = sys(0.0, 1.0, 1.0, 1.0);
        assert!(matches!(evolve(&s, &[1.0, 2.0]), Err(Error::Precondition(_))));
    }
}
