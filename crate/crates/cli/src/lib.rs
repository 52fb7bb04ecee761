//! Command-line front end for the decoherence-free channel simulator.
//!
//! [`parse_config`] turns a `key = value` document plus flag overrides into a
//! validated [`RunConfig`]; [`execute`] runs it and returns the rendered
//! output. Exit codes: 0 success, 1 invalid input, 2 numerical contract
//! failure (truncation leakage, unstable integration).

pub mod config;
pub mod output;
pub mod run;

use std::fmt;

pub use config::{parse_config, Command, Format, RunConfig};
pub use run::execute;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

#[derive(Clone, Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn from_core(e: dfchannel_core::Error) -> Self {
        Self {
            kind: if e.is_numerical() {
                ErrorKind::Numerical
            } else {
                ErrorKind::Validation
            },
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation | ErrorKind::Io => 1,
            ErrorKind::Numerical => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<dfchannel_core::Error> for CliError {
    fn from(e: dfchannel_core::Error) -> Self {
        Self::from_core(e)
    }
}
