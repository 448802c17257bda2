//! Quantum lattice Boltzmann workbench for the advection-diffusion equation.
//!
//! The crate simulates the full pipeline end to end: a classical lattice
//! Boltzmann oracle ([`lbm`]), synthesis of the loading, collision,
//! streaming and error-detection circuits ([`circuits`]), an exact dense
//! statevector simulator with shot sampling and a distribution-level noise
//! channel ([`qsim`]), observable readout and Gaussian state reconstruction
//! ([`readout`]), the error-mitigation stack ([`mitigation`]), and the
//! experiment drivers plus CLI plumbing ([`pipeline`]).

pub mod circuits;
pub mod error;
pub mod lbm;
pub mod mitigation;
pub mod pipeline;
pub mod qsim;
pub mod readout;

pub use error::{QlbmError, Result};
