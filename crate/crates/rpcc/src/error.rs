//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A composite input failed validation; every violated field is listed.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// A file could not be parsed. Row numbers are 1-based.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// Matrix/vector shapes disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The in-cluster weight condition does not hold for the given graph
    /// and partition, so the recovery bounds are undefined. Carries the
    /// full check report.
    #[error("weight assumption violated: margin {}, worst pair {:?}", .0.margin, .0.worst_pair)]
    WeightAssumption(Box<crate::weights::AssumptionReport>),

    /// Two cluster centroids (or a centroid and the grand mean) coincide.
    #[error("duplicate centroids: {0}")]
    DuplicateCentroids(String),

    /// An iterative routine did not reach its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
