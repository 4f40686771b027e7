use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input data is malformed (NaN values, nonpositive prices, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// A quantity is mathematically undefined for the given inputs.
    #[error("domain error: {0}")]
    Domain(String),

    /// A process specification failed validation.
    #[error("invalid process spec: {0}")]
    Spec(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The hypothesis of a checked statement is not met by the input.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("sample budget exceeded: {requested} samples requested, budget is {budget}")]
    Budget { requested: u64, budget: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
