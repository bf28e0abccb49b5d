use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("moment of order {0} is not supported (expected 1 or 2)")]
    UnsupportedMoment(u32),

    #[error("operation requires a continuous size distribution, got {0}")]
    ContinuityViolation(String),

    #[error("no root bracketed: {0}")]
    NoRootBracketed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("simulation aborted at arrival {arrival}: {detail}")]
    NonfiniteWork { arrival: u64, detail: String },

    #[error("confidence interval needs at least 2 trials, got {0}")]
    InsufficientTrials(usize),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
