use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("could not place microcell {placed} of {requested} after {attempts} attempts{context}")]
    PlacementInfeasible {
        requested: usize,
        placed: usize,
        attempts: usize,
        /// Grid point that triggered the failure, filled in by the harness.
        context: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::PlacementInfeasible { .. } => 3,
            Error::Io(_) => 4,
            Error::Domain(_) => 5,
            Error::InsufficientData { .. } => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
