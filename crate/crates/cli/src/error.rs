use thiserror::Error;

/// Failures surfaced by the command-line harness.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input. Nothing has been computed.
    #[error("configuration error: {0}")]
    Config(String),
    /// A simulation or analysis step failed for one setup.
    #[error("numerical failure at {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: seek_core::Error,
    },
    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numerical(point: impl Into<String>, source: seek_core::Error) -> Self {
        CliError::Numerical {
            point: point.into(),
            source,
        }
    }

    pub fn output(path: &std::path::Path, reason: impl ToString) -> Self {
        CliError::Output {
            path: path.display().to_string(),
            reason: reason.to_string(),
        }
    }

    /// Process exit status: 2 for numerical aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 2,
            CliError::Config(_) | CliError::Output { .. } => 1,
        }
    }
}
