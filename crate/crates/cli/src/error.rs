use cbnorm::Error as CoreError;

/// CLI failure modes, each mapped to a fixed exit code: usage errors exit 1,
/// input validation errors exit 2, internal numerical inconsistencies exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation { code: &'static str, message: String },
    Internal(String),
}

impl CliError {
    pub fn invalid_document(message: String) -> Self {
        CliError::Validation {
            code: "invalid_document",
            message,
        }
    }

    pub fn dimension_mismatch(message: String) -> Self {
        CliError::Validation {
            code: "dimension_mismatch",
            message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation { code, .. } => code,
            CliError::Internal(_) => "internal_numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(message)
            | CliError::Validation { message, .. }
            | CliError::Internal(message) => message,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::DimensionMismatch(msg) => CliError::Validation {
                code: "dimension_mismatch",
                message: msg,
            },
            CoreError::InvalidParameter(msg) => CliError::Validation {
                code: "invalid_parameter",
                message: msg,
            },
            CoreError::NotUnitary(msg) => CliError::Validation {
                code: "not_unitary",
                message: msg,
            },
            CoreError::Numerical(msg) => CliError::Internal(msg),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code(), self.message())
    }
}

impl std::error::Error for CliError {}
