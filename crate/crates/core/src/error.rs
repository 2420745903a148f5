use thiserror::Error;

use crate::linalg::SchurDecomposition;

pub type Result<T> = std::result::Result<T, PlaceError>;

/// Coarse outcome class of an error, used to pick process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    NonConvergence,
}

#[derive(Debug, Error)]
pub enum PlaceError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("eigenvalue matching failed: {0}")]
    Matching(String),

    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("pair (A, b) is not controllable: controllability matrix has numerical rank {rank} < {n}")]
    Uncontrollable { rank: usize, n: usize },

    #[error("eigenvalue cannot be moved by feedback: |w^T b| = {projection:e} is below threshold {threshold:e}")]
    InvariantEigenvalue { projection: f64, threshold: f64 },

    #[error("projected pair is not controllable: rank(U^T [b, Ab, ..]) = {rank} < {needed} (condition {kappa:e})")]
    RankDeficient { rank: usize, needed: usize, kappa: f64 },

    #[error("cannot swap Schur blocks at {first} and {second}: {reason}")]
    IllConditionedSwap {
        first: usize,
        second: usize,
        reason: String,
    },

    #[error("QR iteration did not converge within {sweeps} sweeps")]
    NonConvergence {
        sweeps: usize,
        partial: Box<SchurDecomposition>,
    },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        completed: Vec<crate::subspace::StepRecord>,
        #[source]
        source: Box<PlaceError>,
    },
}

impl PlaceError {
    pub fn class(&self) -> ErrorClass {
        match self {
            PlaceError::Dimension(_) | PlaceError::Validation(_) | PlaceError::Matching(_) => ErrorClass::Validation,
            PlaceError::Singular { .. }
            | PlaceError::Uncontrollable { .. }
            | PlaceError::InvariantEigenvalue { .. }
            | PlaceError::RankDeficient { .. }
            | PlaceError::IllConditionedSwap { .. } => ErrorClass::Numerical,
            PlaceError::NonConvergence { .. } => ErrorClass::NonConvergence,
            PlaceError::Step { source, .. } => source.class(),
        }
    }
}
