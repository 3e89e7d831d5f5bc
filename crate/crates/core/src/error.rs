use thiserror::Error;

use crate::kernel::dyadic::DyadicError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dyadic(#[from] DyadicError),

    /// Invalid user-supplied parameters (growth sequence, schedule inputs,
    /// geometric preconditions).
    #[error("configuration error: {0}")]
    Config(String),

    /// A size budget (segment count, pair count, exponent schedule) would be
    /// exceeded.
    #[error("budget exceeded in {stage}: requires {required}, budget is {budget}")]
    Budget {
        stage: &'static str,
        required: u128,
        budget: u128,
    },

    /// The minimal schedule needs a scale beyond the exponent budget.
    #[error("schedule budget exceeded at k = {k}: m_k = {required} > {budget}")]
    ScheduleBudget {
        k: usize,
        required: u32,
        budget: u32,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Dyadic(_) => 2,
            Error::Budget { .. } | Error::ScheduleBudget { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
