use cat0_morse::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("space construction: {0}")]
    Space(#[from] GeomError),
    #[error("{failed} of {total} checks failed")]
    Property { failed: usize, total: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Space(_) => 3,
            CliError::Property { .. } => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
