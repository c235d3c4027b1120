use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("resource: {0}")]
    Resource(String),
    #[error("computation failed: {0}")]
    Core(qquery_core::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<qquery_core::Error> for CliError {
    fn from(e: qquery_core::Error) -> Self {
        match e {
            qquery_core::Error::Resource { .. } => CliError::Resource(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Resource(_) => exit::RESOURCE,
            _ => exit::VIOLATION,
        }
    }
}
