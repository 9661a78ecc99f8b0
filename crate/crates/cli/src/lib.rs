//! Command-line front end: data generation, benchmark sweeps, training, and
//! inference over the model container format.

pub mod bench;
pub mod build;
pub mod commands;
pub mod config;
pub mod container;
pub mod data;

/// Command outcomes split by exit code: usage errors (code 1) versus
/// runtime failures (code 2).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(rescomp::Error),
}

impl From<rescomp::Error> for CliError {
    fn from(err: rescomp::Error) -> Self {
        CliError::Failure(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Failure(err) => write!(f, "{err}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}
