use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("position x = {x} lies outside the domain [0, {length}]")]
    Domain { x: f64, length: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("state became non-finite at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("no front formed: {0}")]
    FrontExistence(String),

    #[error("no level crossing at {level} found in the field")]
    NotFound { level: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("matrix of size {size} exceeds the dense eigensolver cap {cap}; use a coarser grid")]
    TooLarge { size: usize, cap: usize },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("snapshot format error in {path:?}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
