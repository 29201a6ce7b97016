use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown problem '{0}'; use 'all' or one of: {1}")]
    UnknownProblem(String, String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid value '{value}' for '{key}'")]
    InvalidValue { key: String, value: String },
    #[error("unknown setting '{0}'")]
    UnknownKey(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed trace row {row}: {message}")]
    Trace { row: usize, message: String },
    #[error(transparent)]
    Solver(#[from] islp::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::UnknownProblem(..) => 2,
            _ => 1,
        }
    }
}
