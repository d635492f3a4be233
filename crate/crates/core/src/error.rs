//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Bloch state violates complete positivity (|omega| > 1 beyond tolerance).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A linear solve was requested too close to a singular configuration.
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    /// The adaptive ODE integrator could not proceed.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A statistical routine was called in an uninformative configuration.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed grids, ranges, or other structural inputs.
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
