use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("constraint set appears to be empty: {0}")]
    InfeasibleSpec(String),

    #[error("overlap blocks disagree by {0:e}")]
    OverlapMismatch(f64),

    #[error("graph is not chordal")]
    NotChordal,

    #[error("overlap is not a clique: {0}")]
    NotClique(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("determinant vanishes at x = {0}")]
    Pole(f64),

    #[error("series did not stabilize after {0} sweeps")]
    NoStabilization(usize),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("division by a series with zero constant term")]
    ZeroConstantTerm,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
