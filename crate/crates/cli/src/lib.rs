//! Batch tooling around the `transvect-core` library: mesh and configuration
//! file formats, synthetic test populations, and report serialization. The
//! `transvect` binary wires these into subcommands.

use std::fmt;

pub mod config;
pub mod off;
pub mod report;
pub mod synth;

/// Any failure a subcommand can hit after argument parsing.
#[derive(Debug)]
pub enum CliError {
    Io(std::io::Error),
    Off(off::OffError),
    Config(config::ConfigError),
    Json(serde_json::Error),
    Core(transvect_core::Error),
    Message(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Off(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Message(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io(e) => Some(e),
            CliError::Off(e) => Some(e),
            CliError::Config(e) => Some(e),
            CliError::Json(e) => Some(e),
            CliError::Core(e) => Some(e),
            CliError::Message(_) => None,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<off::OffError> for CliError {
    fn from(e: off::OffError) -> Self {
        CliError::Off(e)
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl From<transvect_core::Error> for CliError {
    fn from(e: transvect_core::Error) -> Self {
        CliError::Core(e)
    }
}
