use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },

    #[error(transparent)]
    Core(#[from] rdes::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(line: usize, column: usize, message: impl Into<String>) -> Self {
        CliError::Config {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 2 for bad input, 1 for everything that went wrong while computing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(rdes::Error::InvalidArgument(_)) | CliError::Core(rdes::Error::Parse { .. }) => 2,
            _ => 1,
        }
    }
}
