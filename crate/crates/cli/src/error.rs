use metric_polytope::Error as CoreError;
use serde_json::json;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Resource,
    Runtime,
    Io,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Resource => "resource",
            ErrorKind::Runtime => "runtime",
            ErrorKind::Io => "io",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => EXIT_VALIDATION,
            ErrorKind::Resource => EXIT_RESOURCE,
            ErrorKind::Runtime | ErrorKind::Io => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema_version": crate::SCHEMA_VERSION,
            "error": { "kind": self.kind.name(), "message": self.message },
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::Argument(_) | CoreError::Parse(_) | CoreError::Capability(_) => ErrorKind::Validation,
            CoreError::Capacity { .. } | CoreError::Budget { .. } | CoreError::RefineSchedule { .. } => {
                ErrorKind::Resource
            }
            CoreError::Unbounded | CoreError::Degenerate(_) | CoreError::State(_) => ErrorKind::Runtime,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
