use nalgebra::DMatrix;
use num_complex::Complex64;

use super::eigenstate::{Branch, ChannelSolution, Geometry, Incoming};
use crate::error::{Error, Result};
use crate::params::System;

type C = Complex64;

/// Per-length overlap `lim ⟨ε_i|ε_j⟩ / L` of the two scattering branches at a
/// fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapMatrix {
    /// Row/column order: `[Plus, Minus]`.
    pub entries: [[C; 2]; 2],
    pub condition_number: f64,
}

impl OverlapMatrix {
    pub fn inverse(&self) -> Result<[[C; 2]; 2]> {
        let [[a, b], [c, d]] = self.entries;
        let det = a * d - b * c;
        if det.norm() == 0.0 {
            return Err(Error::Numerical("overlap matrix is singular".into()));
        }
        Ok([[d / det, -b / det], [-c / det, a / det]])
    }

    pub fn hermiticity_error(&self) -> f64 {
        let e = &self.entries;
        (e[0][1] - e[1][0].conj())
            .norm()
            .max(e[0][0].im.abs())
            .max(e[1][1].im.abs())
    }
}

/// Asymptotic amplitudes of one channel, in a fixed channel order:
/// waveguide `A, C, D, F` then each loss reservoir's incoming and outgoing
/// amplitude.
pub(crate) fn asymptotic_amplitudes(sol: &ChannelSolution, with_reservoirs: bool) -> Vec<C> {
    let [a, _, c, d, _, f] = sol.field;
    let mut out = vec![a, c, d, f];
    if with_reservoirs {
        for j in 0..2 {
            out.push(sol.loss_in[j]);
            out.push(sol.loss_out[j]);
        }
    }
    out
}

/// Gram matrix of asymptotic amplitudes. Only co-propagating plane waves of
/// equal wavenumber survive the `L → ∞` average and every asymptotic
/// half-line covers half the box, hence the factor 1/2.
pub(crate) fn gram(solutions: &[ChannelSolution], with_reservoirs: bool) -> DMatrix<C> {
    let amps: Vec<Vec<C>> = solutions
        .iter()
        .map(|s| asymptotic_amplitudes(s, with_reservoirs))
        .collect();
    let n = solutions.len();
    DMatrix::from_fn(n, n, |i, j| {
        amps[i]
            .iter()
            .zip(&amps[j])
            .map(|(x, y)| x.conj() * y)
            .sum::<C>()
            / 2.0
    })
}

/// Condition number of a Hermitian positive-definite matrix.
pub(crate) fn hermitian_condition(m: &DMatrix<C>) -> f64 {
    let sym = (m + m.adjoint()) / C::new(2.0, 0.0);
    let ev = sym.symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Overlap matrix of the `±` branches at `energy`.
pub fn overlap_matrix(system: &System, energy: f64) -> Result<OverlapMatrix> {
    let check = super::localized_state_exists(system);
    if check.exists {
        return Err(Error::LocalizedState(format!(
            "scattering basis is incomplete: {}",
            check.diagnostic
        )));
    }
    let geom = Geometry::new(system);
    let sols = geom.solve_channels(
        energy,
        &[Incoming::Waveguide(Branch::Plus), Incoming::Waveguide(Branch::Minus)],
    )?;
    let g = gram(&sols, false);
    Ok(OverlapMatrix {
        entries: [[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]],
        condition_number: hermitian_condition(&g),
    })
}

/// Overlap matrix over the enlarged channel set: both waveguide branches plus
/// one incoming branch per lossy qubit's reservoir. Returns the matrix and
/// the channel labels in row order.
pub fn channel_overlap(system: &System, energy: f64) -> Result<(DMatrix<C>, Vec<Channel>)> {
    let geom = Geometry::new(system);
    let channels = Channel::all(&geom);
    let incoming: Vec<Incoming> = channels.iter().map(|c| c.incoming()).collect();
    let sols = geom.solve_channels(energy, &incoming)?;
    Ok((gram(&sols, true), channels))
}

/// Incoming channel of a single-excitation eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Waveguide(Branch),
    /// Photon arriving through qubit `j`'s loss reservoir (0-based).
    Reservoir(usize),
}

impl Channel {
    pub(crate) fn incoming(self) -> Incoming {
        match self {
            Channel::Waveguide(b) => Incoming::Waveguide(b),
            Channel::Reservoir(j) => Incoming::Reservoir(j),
        }
    }

    pub(crate) fn all(geom: &Geometry) -> Vec<Channel> {
        let mut out = vec![Channel::Waveguide(Branch::Plus), Channel::Waveguide(Branch::Minus)];
        out.extend((0..2).filter(|&j| geom.has_loss(j)).map(Channel::Reservoir));
        out
    }
}
