use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// One schema or precondition violation found by [`crate::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: "schema",
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn regime(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: "regime",
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn precondition(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: "precondition",
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {}", join(.0))]
    Config(Vec<Diagnostic>),

    #[error(transparent)]
    Compute(#[from] biham::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Machine-readable identifier; compute errors keep the module code.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Compute(e) => e.code(),
            CliError::Io { .. } => "io_error",
        }
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}
