use alloc::boxed::Box;
use alloc::string::String;

use crate::arima::{ArimaModel, ArimaOrder};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input too short, constant, or otherwise unusable for the operation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    /// The data does not support the requested analysis (e.g. no differencing
    /// order makes the series stationary).
    #[error("analysis error: {0}")]
    Analysis(String),
    /// CSS minimization hit the iteration cap; `best` holds the best parameters seen.
    #[error("ARIMA{order} fit did not converge within {iterations} iterations")]
    NotConverged {
        order: ArimaOrder,
        iterations: usize,
        best: Box<ArimaModel>,
    },
}

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
