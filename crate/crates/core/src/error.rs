use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by ingestion, fitting and target revision.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("unsupported match format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("empty curve: {0}")]
    EmptyCurve(String),

    #[error("invalid scenario: {field}: {message}")]
    InvalidScenario { field: &'static str, message: String },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("incomplete family: {0}")]
    IncompleteFamily(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn scenario(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidScenario {
            field,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 data, 3 scenario, 4 fit.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::UnsupportedFormat(_)
            | Error::InvalidRecord(_)
            | Error::Io { .. }
            | Error::EmptySelection(_) => 2,
            Error::InvalidScenario { .. } => 3,
            Error::InsufficientData(_)
            | Error::DegenerateFit(_)
            | Error::SingularFit(_)
            | Error::EmptyCurve(_)
            | Error::DegenerateCurve(_)
            | Error::IncompleteFamily(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
