//! Process exit codes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Success,
    /// Usage or configuration error.
    Config,
    Admissibility,
    /// Dynamical escape or contraction failure.
    Dynamics,
    /// A `verify` property failed.
    VerifyFailed,
}

impl Exit {
    pub fn code(self) -> i32 {
        match self {
            Exit::Success => 0,
            Exit::Config => 1,
            Exit::Admissibility => 2,
            Exit::Dynamics => 3,
            Exit::VerifyFailed => 4,
        }
    }
}

/// An error together with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("{error:#}")]
pub struct CliError {
    pub exit: Exit,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn new(exit: Exit, error: impl Into<anyhow::Error>) -> Self {
        Self {
            exit,
            error: error.into(),
        }
    }

    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self::new(Exit::Config, error)
    }

    pub fn admissibility(error: impl Into<anyhow::Error>) -> Self {
        Self::new(Exit::Admissibility, error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        Self::config(error)
    }
}

macro_rules! config_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(error: $t) -> Self {
                Self::config(error)
            }
        }
    )*};
}

config_error_from!(std::io::Error, serde_json::Error, csv::Error, gdnls_core::Error);

pub type CliResult<T> = Result<T, CliError>;
