//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice error: {0}")]
    Lattice(String),

    #[error("basis error: {0}")]
    Basis(String),

    #[error("hamiltonian error: {0}")]
    Hamiltonian(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigensolver error: {0}")]
    Eigensolver(String),

    #[error("entanglement error: {0}")]
    Entanglement(String),

    #[error("sweep error at {param} = {value}: {message}")]
    SweepPoint {
        param: String,
        value: f64,
        message: String,
    },

    #[error("sweep error: {0}")]
    Sweep(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
