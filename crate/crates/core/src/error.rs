use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    BackendUnavailable { attempts: u32, message: String },

    /// The backend answered, but refused the request (4xx and similar).
    #[error("backend rejected request (status {status}): {message}")]
    BackendRejected { status: u16, message: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("infeasible budget: on-device ratio {target} cannot be reached (best achievable {best})")]
    InfeasibleBudget { target: f64, best: f64 },

    #[error("template error: {0}")]
    Template(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Errors worth retrying at a higher level (the request itself was fine).
    pub fn is_transient(&self) -> bool {
        matches!(self, Error::BackendUnavailable { .. })
    }
}
