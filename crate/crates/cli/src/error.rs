use std::fmt;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Data = 2,
    Partial = 3,
}

/// An error that knows which exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self { code: ExitCode::Usage, source: e.into() }
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        Self { code: ExitCode::Data, source: e.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // one line: the outer context followed by its causes
        write!(f, "{:#}", self.source)
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self::data(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
