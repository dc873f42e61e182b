use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("resource limit reached after {reached} steps: {detail}")]
    Resource { reached: usize, detail: String },

    #[error("quadrature did not reach the requested accuracy: {0}")]
    Accuracy(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
