use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Core(#[from] predfl::Error),
    #[error("ingest: {0}")]
    Ingest(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;
