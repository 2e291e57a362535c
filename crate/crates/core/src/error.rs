use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid information structure: {0}")]
    InvalidInformation(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("infeasible input: {0}")]
    Infeasible(String),
    #[error("linear program: {0}")]
    Lp(String),
    #[error("instance {path}: {message}")]
    Instance { path: String, message: String },
    #[error("internal solver error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn instance(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Instance {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
