use thiserror::Error;

/// Error taxonomy shared by every module.
///
/// The CLI maps these onto exit codes: `Config` is a schema error (2),
/// `Resource` is a budget overrun (3) and the rest are invariant or input
/// failures (1).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("resource budget `{budget}` exceeded: {detail}")]
    Resource { budget: String, detail: String },
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn resource(budget: &str, detail: impl Into<String>) -> Self {
        Error::Resource {
            budget: budget.to_string(),
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
