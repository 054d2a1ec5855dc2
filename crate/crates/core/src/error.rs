use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incompatible spectra: {0}")]
    IncompatibleSpectra(String),

    #[error("incompatible traces: {0}")]
    IncompatibleTraces(String),

    #[error("degenerate correlation peak: {0}")]
    DegeneratePeak(String),

    #[error("config error in {origin}: {message}")]
    Config { origin: String, message: String },

    #[error("malformed trace file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("self-test failed: {0}")]
    SelfTest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration rather than a
    /// failure while running.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidParameter { .. })
    }
}

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    reason: impl FnOnce() -> String,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, reason()))
    }
}
