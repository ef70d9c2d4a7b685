use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The kernel tensor does not have the declared shape.
    #[error("malformed model: {0}")]
    Structure(String),

    /// The model parsed but violates a probability invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid argument `{name}`: {detail}")]
    InvalidArgument { name: &'static str, detail: String },

    /// An operation was asked to evaluate outside the regime where its
    /// formula holds.
    #[error("precondition violated ({regime}): {detail}")]
    Precondition { regime: &'static str, detail: String },

    #[error("index {index} out of range for {what} of size {size}")]
    Index {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("value grid does not match model: {0}")]
    GridMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg(name: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        detail: detail.into(),
    }
}
