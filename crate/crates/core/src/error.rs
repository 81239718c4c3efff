use thiserror::Error;

/// Errors produced by fitting, resampling and the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter vector violates the family's domain (non-positive scale,
    /// non-PD correlation matrix, value outside support, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot support estimation (zero variance, too few rows, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The optimizer hit its iteration cap before meeting the tolerance.
    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    /// The estimated information matrix is not usable (not PD or too
    /// ill-conditioned to invert).
    #[error("singular information matrix: {0}")]
    SingularInformation(String),

    /// A numerical routine could not produce a finite result.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Too many bootstrap replicates failed for the result to be trusted.
    #[error("replicate failures: {failed} of {total} bootstrap replicates failed")]
    ReplicateFailure { failed: usize, total: usize },

    /// Invalid argument at the API boundary (unknown family id, bad
    /// statistic/dimension combination, too few replicates, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
