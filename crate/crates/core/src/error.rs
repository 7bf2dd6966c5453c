use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported derivative order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("insufficient order: requested {requested}, available {available}")]
    InsufficientOrder { requested: usize, available: usize },

    #[error("undefined product: {0}")]
    UndefinedProduct(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regularization order violated: side offset {eps} < {c} * width {eta}")]
    RegularizationOrder { eps: f64, eta: f64, c: f64 },

    #[error("iteration failed: {0}")]
    Iteration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
