use std::fmt;

use thiserror::Error;

/// Which admissible interval a shrinkage factor was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauBound {
    /// Keep-boundary mode: `0 < tau < 1 - m/H`.
    KeepBoundary,
    /// Shift-all mode: `0 < tau < 1`.
    ShiftAll,
}

impl fmt::Display for TauBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauBound::KeepBoundary => f.write_str("Corollary 1 (keep-boundary: 0 < tau < 1 - m/H)"),
            TauBound::ShiftAll => f.write_str("Corollary 3 (shift-all: 0 < tau < 1)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice size C({n}, {k}) overflows usize")]
    SizeOverflow { n: usize, k: usize },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("tau = {tau} violates {bound}; admissible interval is ({lo}, {hi})")]
    TauOutOfBounds {
        tau: f64,
        bound: TauBound,
        lo: f64,
        hi: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate ray: reference point coincides with the pivot")]
    DegenerateRay,

    #[error("point is not on the simplex boundary (Delta - ell = {gap:e})")]
    NotOnBoundary { gap: f64 },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("{0}")]
    Capability(String),

    #[error("run cancelled")]
    Cancelled,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
