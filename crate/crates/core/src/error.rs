use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size cap exceeded: {0}")]
    Cap(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("solver status {status}: {detail}")]
    Solver { status: String, detail: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::InvalidChannel(_) => "invalid-channel",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Cap(_) => "cap",
            Error::Numeric(_) => "numeric",
            Error::Solver { .. } => "solver",
            Error::NotFound(_) => "not-found",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for failures caused by bad input rather than by a computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Shape(_)
                | Error::InvalidChannel(_)
                | Error::InvalidArgument(_)
                | Error::Cap(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
