use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qrpsm_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qrpsm_core::Error::Budget { .. } | qrpsm_core::Error::SearchLimit { .. }) => 3,
            _ => 2,
        }
    }
}
