use std::fmt;

use quakescan::ErrorKind;

/// Front-end errors, classified for the exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;

/// Exit code for an error chain: 2 for configuration problems, 3 for anything the data caused.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Data(_) => EXIT_DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<quakescan::Error>() {
            return match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Data => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}
