use thiserror::Error;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {x} outside the domain of {function} (requires {requirement})")]
    Domain {
        function: &'static str,
        x: f64,
        requirement: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quantum Fisher information diverges: pure state with radial derivative {radial:e}")]
    Divergent { radial: f64 },

    #[error("{method} did not converge: {detail}")]
    NoConvergence {
        method: &'static str,
        detail: String,
    },

    #[error("no root of {0} inside the search bracket")]
    NoRoot(&'static str),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
