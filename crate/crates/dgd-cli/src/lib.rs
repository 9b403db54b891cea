//! IO and command surface around the core library: dataset files, CSV
//! traces, the step-size expression language and the four subcommands.

pub mod cmd;
pub mod dataset;
pub mod expr;
pub mod trace_csv;

use std::fmt;
use std::path::PathBuf;

/// Anything that should terminate the process with the configuration/IO
/// exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(PathBuf, std::io::Error),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
