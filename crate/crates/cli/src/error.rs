use std::fmt;

use leray_core::Error;

pub const EXIT_SPEC: i32 = 2;
pub const EXIT_NOT_ADMISSIBLE: i32 = 3;
pub const EXIT_CLASS: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// An error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn spec(message: impl Into<String>) -> Self {
        CliError { code: EXIT_SPEC, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InvalidProfile(_) | Error::Inconclusive(_) => EXIT_SPEC,
            Error::NotAdmissible { .. } | Error::Divergent(_) => EXIT_NOT_ADMISSIBLE,
            Error::UnsupportedClass(_) => EXIT_CLASS,
            Error::NonFinite(_) | Error::NoConvergence { .. } | Error::NearSingular(_) => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::spec(format!("io: {e}"))
    }
}
