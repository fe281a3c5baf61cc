//! Command-line driver for `imcf-core`: JSON configuration, JSON-lines
//! snapshots, CSV exports and a self-contained run manifest.

pub mod commands;
pub mod config;
pub mod persist;

pub use commands::{run_config, verify_manifest, RunSummary, VerifyReport};
pub use config::{RunConfig, SweepConfig, OUTPUT_DIR_ENV};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] imcf_core::GeometryError),
    #[error(transparent)]
    Flow(#[from] imcf_core::FlowError),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Format(_) | Error::Geometry(_) => exit::CONFIG,
            _ => exit::FAILURE,
        }
    }
}
