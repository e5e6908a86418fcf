use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    #[error("failed to generate a simple connected {k}-regular graph on {n} vertices after {attempts} attempts")]
    GenerationFailed { n: usize, k: usize, attempts: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dense eigensolver cap exceeded: n={n} > {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("malformed edge list: {0}")]
    MalformedEdgeList(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),
}

pub type Result<T> = std::result::Result<T, Error>;
