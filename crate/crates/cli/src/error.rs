use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Every validation problem found, one per entry.
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("acceptance check failed: {0}")]
    Check(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(vec![msg.into()])
    }

    /// 0 success, 1 configuration, 2 numerical, 3 check failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<selstbc::Error> for CliError {
    fn from(e: selstbc::Error) -> Self {
        match e {
            selstbc::Error::Config(msg) => CliError::Config(vec![msg]),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
