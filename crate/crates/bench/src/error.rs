use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config not found: {0}")]
    ConfigNotFound(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] smc_bench_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
