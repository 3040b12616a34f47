//! Exact dynamical maps of small fermionic systems coupled to thermal Fermi baths.
//!
//! Each bath is split into an empty and a filled thermofield branch and
//! mapped onto a pair of tight-binding chains. The system is doubled by a
//! replica register, prepared in an anti-correlated pair state, and evolved
//! together with the chains, either with correlation matrices (quadratic
//! Hamiltonians) or by exact diagonalisation (interacting systems). The
//! reduced system-replica state at time τ is, after a replica-only unitary,
//! the Choi state of the dynamical map `Λ(τ)`, from which the time-local
//! generator, spectra, fixed points and memory times follow.
//!
//! Units: energies in the bath half-bandwidth `D`, times in `1/D`.

pub mod chainmap;
pub mod edcore;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod maps;
pub mod pipeline;
pub mod quad;
pub mod random;
pub mod spectral;
pub mod state;
pub mod transport;

pub use error::{Error, Result};
pub use faer::c64;
