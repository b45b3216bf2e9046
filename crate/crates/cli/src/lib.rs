//! Library side of the `aoi` command-line tool: report types, table presets
//! and output formatting.

pub mod commands;
pub mod format;
pub mod settings;

use std::fmt;

/// Exit status for bad input.
pub const EXIT_INVALID: i32 = 2;
/// Exit status for a failed numerical routine.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
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

impl From<aoi::Error> for CliError {
    fn from(e: aoi::Error) -> Self {
        Self {
            code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            },
            message: e.to_string(),
        }
    }
}
