use thiserror::Error;

use crate::states::DensityMatrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only 2 and 4 are handled")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("{0}")]
    Domain(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("search space too large: {size:.3e} candidates exceeds limit {limit:.3e}")]
    Resource { size: f64, limit: f64 },

    #[error("optimizer did not converge after {evaluations} evaluations (gradient norm {gradient_norm:.3e})")]
    Convergence {
        evaluations: usize,
        gradient_norm: f64,
        best: Box<DensityMatrix>,
    },

    #[error("bootstrap run {run} failed: {source}")]
    Bootstrap {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
