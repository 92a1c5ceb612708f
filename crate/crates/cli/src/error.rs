use rough_dot::ErrorClass;

/// Front-end failure mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Command line could not be parsed; clap has already reported it.
    Usage,
    Parameter(String),
    Numerical(String),
}

impl CliError {
    pub fn param(msg: impl Into<String>) -> Self {
        CliError::Parameter(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage | CliError::Parameter(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage => "",
            CliError::Parameter(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<rough_dot::Error> for CliError {
    fn from(e: rough_dot::Error) -> Self {
        match e.class() {
            ErrorClass::Parameter => CliError::Parameter(e.to_string()),
            ErrorClass::Numerical => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parameter(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parameter(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parameter(format!("malformed CSV: {e}"))
    }
}
