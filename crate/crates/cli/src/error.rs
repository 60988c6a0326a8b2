use std::fmt;

/// Failure classes of the command line, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or an input set the pipeline cannot start on.
    Config(String),
    /// Unreadable path or undecodable file.
    Input(somqe::Error),
    /// A library precondition was violated after validation passed.
    Internal(somqe::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<somqe::Error> for CliError {
    fn from(e: somqe::Error) -> Self {
        match e {
            somqe::Error::Io { .. } | somqe::Error::Format(_) | somqe::Error::Json(_) => {
                CliError::Input(e)
            }
            somqe::Error::Contract(_) => CliError::Internal(e),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Internal(e) => write!(f, "internal error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}
