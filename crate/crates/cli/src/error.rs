use std::fmt;

use eigenlab::Error;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self { code: EXIT_CHECK, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Parse(_) | Error::Unsupported(_) | Error::Io(_) | Error::Json(_) => EXIT_CONFIG,
            Error::NonConvergence { .. }
            | Error::RankDeficient(_)
            | Error::Bracketing { .. }
            | Error::EmptyNeighborhood(_)
            | Error::Degenerate(_) => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
