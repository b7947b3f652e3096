use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Domain` and `Usage` signal invalid input and map to a validation exit
/// status in the CLI; the remaining variants are numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("construction failed at sample {sample}: {reason} (surgery applied: {surgery_applied})")]
    Construction {
        sample: usize,
        reason: String,
        surgery_applied: bool,
    },
    #[error("series diverges: {0}")]
    Divergence(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("output failed: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Usage(_) | Error::Divergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
