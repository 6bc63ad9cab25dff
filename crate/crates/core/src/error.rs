use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "outlier selection failed: only {eligible} nodes satisfy the degree bound {bound:.3} \
         but {requested} outliers were requested; increase xi or decrease s0"
    )]
    OutlierEligibility {
        eligible: usize,
        requested: usize,
        bound: f64,
    },

    #[error(
        "global rewiring did not terminate: {remaining} offending edges left after {attempts} \
         failed attempts; the degree sequence is likely not graphic and should be reconsidered"
    )]
    RewiringFailed { remaining: usize, attempts: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by rejected input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Domain(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
