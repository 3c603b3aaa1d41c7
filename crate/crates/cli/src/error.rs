use prefmoo_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}{message}", pointer.as_ref().map(|p| format!("at {p}: ")).unwrap_or_default())]
    Validation {
        message: String,
        pointer: Option<String>,
    },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self::Validation {
            message: message.into(),
            pointer: None,
        }
    }

    /// Attaches a JSON pointer to a validation error that has none.
    pub fn at(self, pointer: &str) -> Self {
        match self {
            Self::Validation { message, pointer: None } => Self::Validation {
                message,
                pointer: Some(pointer.to_owned()),
            },
            other => other,
        }
    }

    /// Prefixes the pointer, e.g. to nest a section inside a larger file.
    pub fn under(self, prefix: &str) -> Self {
        match self {
            Self::Validation { message, pointer } => Self::Validation {
                message,
                pointer: Some(format!("{prefix}{}", pointer.unwrap_or_default())),
            },
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation { .. } => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(io) => Self::Runtime(io.to_string()),
            CoreError::Cancelled | CoreError::NotImplemented(_) | CoreError::Capability(_) => {
                Self::Runtime(e.to_string())
            }
            other => Self::validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
