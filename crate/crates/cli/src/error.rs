use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_LOOKUP: i32 = 5;

/// A failure carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    pub fn estimation(message: impl Into<String>) -> Self {
        Self { code: EXIT_ESTIMATION, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn lookup(message: impl Into<String>) -> Self {
        Self { code: EXIT_LOOKUP, message: message.into() }
    }

    /// Output files that cannot be written are reported as configuration errors.
    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self::config(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
