//! Library side of the `rainweave` command-line tool.
//!
//! The subcommands live here (rather than in `main.rs`) so tests can drive
//! them directly and inspect the returned manifests.

pub mod commands;
pub mod config;
pub mod manifest;
mod staging;

pub use commands::{
    cmd_inspect, cmd_pairs, cmd_transfer, InspectArgs, InspectReport, PairsArgs, TransferArgs,
};
pub use manifest::RunManifest;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rainweave::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(rainweave::Error::Io(e))
    }
}

impl CliError {
    /// Short name of the failure class, used as the diagnostic prefix.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Core(rainweave::Error::Io(_)) => "io",
            CliError::Core(rainweave::Error::Format(_)) => "format",
            CliError::Core(rainweave::Error::Bounds { .. } | rainweave::Error::Dimension(_)) => {
                "dimension"
            }
            CliError::Core(rainweave::Error::Extraction(_)) => "extraction",
            CliError::Core(rainweave::Error::Config(_)) | CliError::Config(_) => "config",
        }
    }

    /// Process exit status; 2 is left to argument parsing errors.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "io" => 3,
            "format" => 4,
            "dimension" => 5,
            "extraction" => 6,
            _ => 7,
        }
    }
}
