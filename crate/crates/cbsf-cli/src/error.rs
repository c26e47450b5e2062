use std::fmt;

/// CLI failure with an exit-code category: 2 for configuration/validation
/// problems, 3 for data and IO problems.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(cbsf::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Data(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<cbsf::Error> for CliError {
    fn from(e: cbsf::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(e) => match e {
                cbsf::Error::InvalidParam { .. } | cbsf::Error::UnknownUser(_) => 2,
                _ => 3,
            },
            CliError::Io(_) => 3,
        }
    }
}
