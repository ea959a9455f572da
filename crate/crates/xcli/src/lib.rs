//! Experiment driver for `fqapprox`: TOML configs in, CSV tables and JSON
//! summaries out.

pub mod config;
pub mod experiments;
pub mod report;
pub mod tools;

use thiserror::Error;

pub use config::{ExperimentConfig, Overrides};
pub use experiments::{run_biggrad, run_khintchine, run_qn, run_ubiquity};
pub use report::{ExperimentReport, Table, Verdict};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("budget: {0}")]
    Budget(String),
    #[error(transparent)]
    Engine(#[from] fqapprox::Error),
    #[error(transparent)]
    Field(#[from] fqapprox::FieldError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
