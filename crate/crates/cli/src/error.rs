use std::fmt;

use riskexplain::backend::BackendError;
use riskexplain::{BaselineError, ContextError, DatasetError, PromptError};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_EMPTY_SELECTION: u8 = 3;
pub const EXIT_BACKEND: u8 = 4;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn empty_selection(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_EMPTY_SELECTION,
            message: message.into(),
        }
    }

    pub fn backend(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_BACKEND,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::input(e.to_string())
            }
        }
    )*};
}

input_error!(
    DatasetError,
    BaselineError,
    ContextError,
    PromptError,
    std::io::Error,
    serde_json::Error
);

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Config(_) => CliError::input(e.to_string()),
            _ => CliError::backend(e.to_string()),
        }
    }
}
