use thiserror::Error;

/// Errors raised anywhere in the hint pipeline.
///
/// Each variant maps onto one of the CLI exit classes: `Usage` is a caller
/// mistake, `Parse`/`Address`/`Data`/`Io`/`Json`/`Checksum` are data errors and
/// `Numerical` covers solver failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid edit address: {0}")]
    Address(String),

    #[error("invalid configuration: {0}")]
    Usage(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("numerical failure: {message} (residual norm {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("model checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for this error: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Numerical { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
