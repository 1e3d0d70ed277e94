// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    #[error("forecast origin {origin}: {source}")]
    Forecast {
        origin: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("table format: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Self::Data(msg.into())
    }

    /// Innermost error, looking through forecast-origin wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Self::Forecast { source, .. } => source.root(),
            other => other,
        }
    }
}
