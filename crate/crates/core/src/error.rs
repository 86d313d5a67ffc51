use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { min_eigenvalue: f64 },

    #[error("invalid weights: {0}")]
    BadWeights(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has {sites} sites but {values} values")]
    LengthMismatch { sites: usize, values: usize },

    #[error("negative kernel radius {0}")]
    NegativeRadius(f64),

    #[error("symmetric eigensolver did not converge")]
    EigenNoConvergence,

    #[error("trial {trial} of sweep value #{sweep} failed: {message}")]
    TrialFailed {
        sweep: usize,
        trial: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
