//! Entanglement generation between two qubits chirally coupled to a
//! one-dimensional waveguide.
//!
//! Two dynamical pictures are provided:
//!
//! * [`markovian`]: the reduced chiral master equation (time-local, no
//!   retardation) together with its closed-form concurrence;
//! * [`scattering`]: exact single-excitation dynamics built from real-space
//!   scattering eigenstates, including retardation between the emitters.
//!
//! [`experiments`] runs parameter sweeps over either engine.

pub mod config;
pub mod error;
pub mod experiments;
pub mod markovian;
pub mod ode;
pub mod output;
pub mod params;
pub mod peak;
pub mod scattering;

pub use error::{Error, Result};
pub use params::{QubitParams, System, SystemConfig};
