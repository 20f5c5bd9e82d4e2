use std::fmt;
use std::process::ExitCode;

/// Failure of a CLI run, with its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination or argument value.
    Usage(String),
    Io(String),
    Parse(String),
    /// Resource cap, degenerate sample, numerical failure.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Parse(_) => ExitCode::from(2),
            CliError::Compute(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

pub fn compute<E: fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}
