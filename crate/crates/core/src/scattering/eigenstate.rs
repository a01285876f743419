use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::System;

type C = Complex64;
type Mat6 = SMatrix<C, 6, 6>;
type Vec6 = SVector<C, 6>;

const I: C = C::new(0.0, 1.0);

/// Incidence branch of a scattering eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Photon incident from `x = -∞` (`A = 1`, `F = 0`).
    Plus,
    /// Photon incident from `x = +∞` (`F = 1`, `A = 0`).
    Minus,
}

/// Single-excitation eigenstate at real energy `ε`.
///
/// Coordinates are centred on the qubit pair (`x₁ = -d/2`, `x₂ = d/2`). The
/// right-moving field is `e^{iεx/v_g}·{A, B, C}` on the three regions left of,
/// between and right of the qubits; the left-moving field is
/// `e^{-iεx/v_g}·{D, E, F}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringEigenstate {
    pub energy: f64,
    pub branch: Branch,
    pub coeff_a: C,
    pub coeff_b: C,
    pub coeff_c: C,
    pub coeff_d: C,
    pub coeff_e: C,
    pub coeff_f: C,
    pub alpha1: C,
    pub alpha2: C,
}

impl ScatteringEigenstate {
    /// Transmitted and reflected amplitudes for this branch.
    pub fn transmission_reflection(&self) -> (C, C) {
        match self.branch {
            Branch::Plus => (self.coeff_c, self.coeff_d),
            Branch::Minus => (self.coeff_d, self.coeff_c),
        }
    }

    pub fn alphas(&self) -> [C; 2] {
        [self.alpha1, self.alpha2]
    }
}

/// Solution of the stationary equations for an arbitrary incoming channel:
/// waveguide amplitudes `A` and `F` plus a unit drive through one qubit's
/// loss reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ChannelSolution {
    /// `[A, B, C, D, E, F]`.
    pub field: [C; 6],
    pub alpha: [C; 2],
    /// Incoming and outgoing amplitudes in each qubit's loss reservoir.
    pub loss_in: [C; 2],
    pub loss_out: [C; 2],
}

/// Incoming excitation of a channel.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Incoming {
    Waveguide(Branch),
    Reservoir(usize),
}

/// Energy-independent pieces of the linear system.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    x: [f64; 2],
    v_g: f64,
    v_r: [f64; 2],
    v_l: [f64; 2],
    v_loss: [f64; 2],
    omega: [C; 2],
    coupled: [bool; 2],
}

impl Geometry {
    pub fn new(system: &System) -> Self {
        let cfg = system.config();
        let half = system.derived().separation / 2.0;
        let v = cfg.v_g;
        let qs = [cfg.qubit1, cfg.qubit2];
        Geometry {
            x: [-half, half],
            v_g: v,
            v_r: qs.map(|q| (q.gamma_r * v).sqrt()),
            v_l: qs.map(|q| (q.gamma_l * v).sqrt()),
            v_loss: qs.map(|q| (q.gamma_loss * v).sqrt()),
            omega: qs.map(|q| C::new(q.omega, -q.gamma_loss / 2.0)),
            coupled: qs.map(|q| q.gamma_r + q.gamma_l + q.gamma_loss > 0.0),
        }
    }

    pub fn has_loss(&self, qubit: usize) -> bool {
        self.v_loss[qubit] > 0.0
    }

    /// Coefficient matrix over the unknowns `[B, C, D, E, α₁, α₂]`.
    fn matrix(&self, energy: f64, with_loss: bool) -> (Mat6, [C; 2]) {
        let k = energy / self.v_g;
        let p = [C::from_polar(1.0, k * self.x[0]), C::from_polar(1.0, k * self.x[1])];
        let omega = if with_loss {
            self.omega
        } else {
            self.omega.map(|w| C::new(w.re, 0.0))
        };
        // A qubit with no decay channel is pinned to α = 0 so that its bare
        // excitation does not make the system singular at ε = Ω.
        let detune = [0, 1].map(|j| {
            if self.coupled[j] {
                C::new(energy, 0.0) - omega[j]
            } else {
                C::new(1.0, 0.0)
            }
        });
        let v = self.v_g;
        let (vr, vl) = (self.v_r, self.v_l);
        let z = C::new(0.0, 0.0);
        #[rustfmt::skip]
        let m = Mat6::from_row_slice(&[
            // qubit 1: (ε - Ω̃₁)α₁ = V₁R·φ_R(x₁) + V₁L·φ_L(x₁), fields averaged across x₁
            -vr[0] * p[0] / 2.0, z, -vl[0] / (2.0 * p[0]), -vl[0] / (2.0 * p[0]), detune[0], z,
            // qubit 2
            -vr[1] * p[1] / 2.0, -vr[1] * p[1] / 2.0, z, -vl[1] / (2.0 * p[1]), z, detune[1],
            // right-mover jump at x₁: B - A = -iV₁R α₁ / v
            p[0], z, z, z, I * vr[0] / v, z,
            // right-mover jump at x₂: C - B = -iV₂R α₂ / v
            -p[1], p[1], z, z, z, I * vr[1] / v,
            // left-mover jump at x₁: E - D = iV₁L α₁ / v
            z, z, -1.0 / p[0], 1.0 / p[0], -I * vl[0] / v, z,
            // left-mover jump at x₂: F - E = iV₂L α₂ / v
            z, z, z, -1.0 / p[1], z, -I * vl[1] / v,
        ]);
        (m, p)
    }

    fn rhs(&self, p: [C; 2], a: C, f: C, drive: [C; 2]) -> Vec6 {
        let (vr, vl) = (self.v_r, self.v_l);
        Vec6::from_column_slice(&[
            drive[0] + a * vr[0] * p[0] / 2.0,
            drive[1] + f * vl[1] / (2.0 * p[1]),
            a * p[0],
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            -f / p[1],
        ])
    }

    /// Solves every requested channel at one energy with a single
    /// factorization.
    pub fn solve_channels(&self, energy: f64, channels: &[Incoming]) -> Result<Vec<ChannelSolution>> {
        let (m, p) = self.matrix(energy, true);
        let lu = m.lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..6).map(|i| u[(i, i)].norm()).collect();
        let max_piv = diag.iter().cloned().fold(0.0, f64::max);
        let min_piv = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_piv > 1e-13 * max_piv) {
            return Err(Error::LocalizedState(format!(
                "scattering equations are singular at ε = {energy} (pivot ratio {:e}); \
                 check localized_state_exists",
                min_piv / max_piv
            )));
        }
        let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max);
        channels
            .iter()
            .map(|&ch| {
                let (a, f, drive, loss_in) = match ch {
                    Incoming::Waveguide(Branch::Plus) => (C::new(1.0, 0.0), C::new(0.0, 0.0), [C::new(0.0, 0.0); 2], [C::new(0.0, 0.0); 2]),
                    Incoming::Waveguide(Branch::Minus) => (C::new(0.0, 0.0), C::new(1.0, 0.0), [C::new(0.0, 0.0); 2], [C::new(0.0, 0.0); 2]),
                    Incoming::Reservoir(j) => {
                        let mut drive = [C::new(0.0, 0.0); 2];
                        let mut loss_in = [C::new(0.0, 0.0); 2];
                        drive[j] = C::new(self.v_loss[j], 0.0);
                        loss_in[j] = C::new(1.0, 0.0);
                        (C::new(0.0, 0.0), C::new(0.0, 0.0), drive, loss_in)
                    }
                };
                let b = self.rhs(p, a, f, drive);
                let x = lu
                    .solve(&b)
                    .ok_or_else(|| Error::Numerical(format!("LU solve failed at ε = {energy}")))?;
                let resid = (m * x - b).iter().map(|r| r.norm()).fold(0.0, f64::max);
                let xnorm = x.iter().map(|r| r.norm()).fold(0.0, f64::max);
                let bnorm = b.iter().map(|r| r.norm()).fold(0.0, f64::max);
                if resid > 1e-12 * (scale * xnorm + bnorm) {
                    return Err(Error::Numerical(format!(
                        "scattering solve residual {resid:e} too large at ε = {energy}"
                    )));
                }
                let alpha = [x[4], x[5]];
                let loss_out = [0, 1].map(|j| loss_in[j] - I * self.v_loss[j] / self.v_g * alpha[j]);
                Ok(ChannelSolution {
                    field: [a, x[0], x[1], x[2], x[3], f],
                    alpha,
                    loss_in,
                    loss_out,
                })
            })
            .collect()
    }

    #[cfg(test)]
    /// Smallest singular value of the bound-state system (`A = F = 0`, no
    /// loss), normalised by the largest.
    pub fn bound_state_singularity(&self, energy: f64) -> f64 {
        let (m, _) = self.matrix(energy, false);
        let sv = m.singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        min / max
    }
}

/// Solves the plane-wave ansatz for branch `branch` at real energy `energy`.
///
/// Losses enter through the complex qubit frequency `Ω_j - iΓ_j/2`.
pub fn solve_eigenstate(system: &System, energy: f64, branch: Branch) -> Result<ScatteringEigenstate> {
    let geom = Geometry::new(system);
    let sol = geom.solve_channels(energy, &[Incoming::Waveguide(branch)])?[0];
    let [a, b, c, d, e, f] = sol.field;
    Ok(ScatteringEigenstate {
        energy,
        branch,
        coeff_a: a,
        coeff_b: b,
        coeff_c: c,
        coeff_d: d,
        coeff_e: e,
        coeff_f: f,
        alpha1: sol.alpha[0],
        alpha2: sol.alpha[1],
    })
}

/// Transmission and reflection of one branch at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub energy: f64,
    pub t: C,
    pub r: C,
    /// `1 - |t|² - |r|²`: probability lost to the reservoirs.
    pub flux_deficit: f64,
}

/// Transmission / reflection amplitudes of `branch` across `energies`.
pub fn transmission_spectrum(system: &System, energies: &[f64], branch: Branch) -> Result<Vec<SpectrumPoint>> {
    let geom = Geometry::new(system);
    energies
        .iter()
        .map(|&energy| {
            let sol = geom.solve_channels(energy, &[Incoming::Waveguide(branch)])?[0];
            let [_, _, c, d, _, _] = sol.field;
            let (t, r) = match branch {
                Branch::Plus => (c, d),
                Branch::Minus => (d, c),
            };
            Ok(SpectrumPoint {
                energy,
                t,
                r,
                flux_deficit: 1.0 - t.norm_sqr() - r.norm_sqr(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{QubitParams, SystemConfig};

    fn single(gamma_r: f64, gamma_l: f64, gamma_loss: f64) -> System {
        SystemConfig {
            qubit1: QubitParams {
                omega: 1.0,
                gamma_r,
                gamma_l,
                gamma_loss,
                position: 0.0,
            },
            qubit2: QubitParams::uncoupled(1.0, 2.0),
            v_g: 1.0,
            omega0: 1.0,
        }
        .validate_single_qubit()
        .unwrap()
    }

    #[test]
    fn bare_waveguide_is_free_propagation() {
        let cfg = SystemConfig {
            qubit1: QubitParams::uncoupled(1.0, 0.0),
            qubit2: QubitParams::uncoupled(1.0, 1.0),
            v_g: 1.0,
            omega0: 1.0,
        };
        // Both qubits uncoupled is rejected; build the geometry directly.
        assert!(cfg.validate_single_qubit().is_err());
        let mut one = cfg;
        one.qubit1.gamma_loss = 1e-3;
        let sys = one.validate_single_qubit().unwrap();
        let st = solve_eigenstate(&sys, 1.3, Branch::Plus).unwrap();
        for c in [st.coeff_a, st.coeff_b, st.coeff_c] {
            assert!((c - 1.0).norm() < 1e-14);
        }
        for c in [st.coeff_d, st.coeff_e, st.coeff_f, st.alpha2] {
            assert!(c.norm() < 1e-14);
        }
    }

    #[test]
    fn non_chiral_qubit_reflects_resonant_photon() {
        let sys = single(0.05, 0.05, 0.0);
        let st = solve_eigenstate(&sys, 1.0, Branch::Plus).unwrap();
        assert!(st.coeff_c.norm() < 1e-12);
        assert!((st.coeff_d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chiral_qubit_only_imprints_a_phase() {
        let sys = single(0.1, 0.0, 0.0);
        for e in [0.7, 0.95, 1.0, 1.02, 1.6] {
            let st = solve_eigenstate(&sys, e, Branch::Plus).unwrap();
            assert!((st.coeff_c.norm() - 1.0).abs() < 1e-12, "ε={e}");
            assert!(st.coeff_d.norm() < 1e-14);
        }
    }

    #[test]
    fn lossy_qubit_has_flux_deficit() {
        let sys = single(0.05, 0.05, 0.02);
        let sp = transmission_spectrum(&sys, &[1.0], Branch::Plus).unwrap()[0];
        assert!(sp.flux_deficit > 0.0);
    }

    #[test]
    fn branch_conventions() {
        let sys = SystemConfig::symmetric(0.3, 1.0, 0.1, 0.8).unwrap().validate().unwrap();
        let plus = solve_eigenstate(&sys, 1.01, Branch::Plus).unwrap();
        assert_eq!((plus.coeff_a, plus.coeff_f), (C::new(1.0, 0.0), C::new(0.0, 0.0)));
        let minus = solve_eigenstate(&sys, 1.01, Branch::Minus).unwrap();
        assert_eq!((minus.coeff_a, minus.coeff_f), (C::new(0.0, 0.0), C::new(1.0, 0.0)));
    }
}
