//! Exact ground states of small lattice models, sublattice reduced density
//! matrices, and von Neumann entropy sweeps for locating quantum phase
//! transition candidates.

pub mod config;
pub mod eigensolver;
pub mod entanglement;
pub mod error;
pub mod gaussian_ising;
pub mod hamiltonian;
pub mod hilbert;
pub mod lattice;
pub mod linalg;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
