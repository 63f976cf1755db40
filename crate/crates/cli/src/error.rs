use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 usage or range, 2 numerical, 3 I/O or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Config(_) | CliError::Io { .. } => 3,
        }
    }
}

impl From<polent::Error> for CliError {
    fn from(e: polent::Error) -> Self {
        use polent::Error as E;
        match e {
            E::LambdaOutOfRange(_)
            | E::InvalidParameter(_)
            | E::MarginTooSmall(_)
            | E::ModeOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::DegenerateSpace => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
