use prefmoo_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),

    #[error("{0}")]
    Conflict(String),

    #[error("{message}")]
    Validation {
        message: String,
        pointer: Option<String>,
    },

    #[error("cycle cancelled")]
    Cancelled,

    #[error("{0}")]
    Internal(String),
}

impl SessionError {
    pub fn validation(message: impl Into<String>, pointer: Option<&str>) -> Self {
        Self::Validation {
            message: message.into(),
            pointer: pointer.map(str::to_owned),
        }
    }

    /// Wraps a core error, attributing validation failures to `pointer`.
    pub fn from_core(err: CoreError, pointer: Option<&str>) -> Self {
        match err {
            CoreError::Cancelled => Self::Cancelled,
            CoreError::TauOutOfBounds { .. } => {
                let p = pointer.map(|p| format!("{p}/tau"));
                Self::validation(err.to_string(), p.as_deref())
            }
            CoreError::Validation(_) | CoreError::Config(_) | CoreError::SizeOverflow { .. } => {
                Self::validation(err.to_string(), pointer)
            }
            other => Self::Internal(other.to_string()),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::NotFound(_) => "not_found",
            Self::Conflict(_) => "conflict",
            Self::Validation { .. } => "validation",
            Self::Cancelled => "cancelled",
            Self::Internal(_) => "internal",
        }
    }
}

pub type SessionResult<T> = std::result::Result<T, SessionError>;
