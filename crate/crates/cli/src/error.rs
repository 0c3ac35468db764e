use serde::Serialize;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mtbi_core::Error),
    #[error("dataset failed validation with {0} issue(s)")]
    Invalid(usize),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(mtbi_core::Error::InvalidConfig(_)) => EXIT_USAGE,
            CliError::Core(_) | CliError::Invalid(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Core(e) => e.kind(),
            CliError::Invalid(_) => "ValidationFailed",
            CliError::Internal(_) => "Internal",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            status: "error",
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

/// One-line JSON written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}
