use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid or inconsistent configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Root finding for the half-length of one posterior draw failed.
    #[error("root finding failed for draw {index}: {reason}")]
    Solver { index: usize, reason: String },

    /// A sampler produced, or would produce, a degenerate state.
    #[error("sampler diagnostics: {0}")]
    Sampler(String),

    /// A matrix that must be factorized was singular or not positive definite.
    #[error("linear algebra error: matrix `{matrix}` is singular or not positive definite")]
    LinAlg { matrix: &'static str },

    /// Malformed input file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
