//! Crate-wide error type.
//!
//! Errors are grouped by how a caller should react: `Domain` means the
//! request itself is invalid (bad parameters, degenerate spectrum), while
//! `NonConvergence` and `Ode` mean a numerical method failed on a valid
//! request and a different method (or looser tolerance) may still succeed.

use std::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for all evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid input: parameter out of domain, degenerate spectrum,
    /// inconsistent configuration.
    Domain(String),
    /// A series or iteration failed to converge. Carries the last partial
    /// value and the number of terms or iterations consumed so the caller
    /// can decide whether to fall back to another method.
    NonConvergence {
        context: String,
        partial: f64,
        terms: usize,
    },
    /// An ODE integration failed (step underflow, non-finite coefficient
    /// matrix, tolerance failure, state handoff mismatch).
    Ode(String),
    /// The problem is too ill-conditioned to produce a trustworthy answer
    /// (e.g. nearly coincident eigenvalues).
    IllConditioned(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain: {msg}"),
            Error::NonConvergence {
                context,
                partial,
                terms,
            } => write!(
                f,
                "non-convergence: {context} (last partial {partial:e} after {terms} terms)"
            ),
            Error::Ode(msg) => write!(f, "ode: {msg}"),
            Error::IllConditioned(msg) => write!(f, "ill-conditioned: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Short machine-parseable kind tag (stable across releases; the CLI
    /// prints it in one-line error reports and maps it to an exit code).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Ode(_) => "ode",
            Error::IllConditioned(_) => "ill-conditioned",
        }
    }
}
