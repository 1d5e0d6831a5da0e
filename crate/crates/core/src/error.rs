use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state left the admissible range of the flux.
    #[error("inadmissible state {value} at {location}")]
    Domain { value: f64, location: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Broken internal invariant; indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(value: f64, location: impl Into<String>) -> Self {
        Error::Domain {
            value,
            location: location.into(),
        }
    }
}
