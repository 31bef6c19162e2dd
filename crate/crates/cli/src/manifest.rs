//! JSON records written next to every run's outputs.
//!
//! Field names are part of the on-disk format; see `docs/manifest.md`.

use std::fs;
use std::path::Path;

use rainweave::TransferConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAIRS_FILE: &str = "pairs.json";
pub const PAIRS_DIR: &str = "pairs";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    /// `exemplar`, `mask` or `target`.
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub load_ms: f64,
    pub extract_ms: f64,
    pub synthesize_ms: f64,
    pub write_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config: TransferConfig,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<OutputFile>,
    pub timing: Timing,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, crate::CliError> {
        let text = fs::read_to_string(path).map_err(rainweave::Error::from)?;
        serde_json::from_str(&text)
            .map_err(|e| crate::CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub index: usize,
    /// Target file the clean patch was cut from, as given on the command line.
    pub target: String,
    pub position: Position,
    pub size: usize,
    pub residual_index: usize,
    /// Exemplar window the residual was derived from.
    pub residual_source: Position,
    pub clean: OutputFile,
    pub rain: OutputFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairsFile {
    pub records: Vec<PairEntry>,
}
