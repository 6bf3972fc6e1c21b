use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    /// An argument violated a mathematical precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// The environment's round budget has been spent.
    #[error("budget exhausted: horizon {horizon} already reached")]
    Budget { horizon: u64 },
    /// An operation was invoked in a state that does not allow it.
    #[error("state error: {0}")]
    State(String),
    /// An experiment configuration is invalid.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

impl BanditError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        BanditError::Domain(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        BanditError::State(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        BanditError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = BanditError> = std::result::Result<T, E>;
