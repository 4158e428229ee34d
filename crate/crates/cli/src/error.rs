use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// bad flags, config file or input domain; exit 2
    Config(String),
    /// a numerical routine failed; exit 3
    Numeric(splitsea::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Numeric(splitsea::Error::InvalidInput(_)) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Numeric(e) => e.name(),
            CliError::Io(_) => "IoError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => write!(f, "{}: {m}", self.name()),
            CliError::Numeric(e) => write!(f, "{}: {e}", e.name()),
        }
    }
}

impl From<splitsea::Error> for CliError {
    fn from(e: splitsea::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
