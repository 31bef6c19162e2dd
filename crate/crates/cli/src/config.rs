//! Configuration resolution.
//!
//! Each field is taken from the first source that sets it: command-line
//! flag, then the JSON config file, then built-in defaults. The seed has one
//! more fallback between the config file and the default: the
//! `RAINWEAVE_SEED` environment variable. When the overlap is not set
//! anywhere it is derived from the resolved patch size.

use std::fs;
use std::path::Path;

use clap::Args;
use rainweave::synthesis::default_overlap;
use rainweave::TransferConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "RAINWEAVE_SEED";

/// Partial configuration; unset fields fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Patch side length in pixels [default: 32]
    #[arg(long = "patch")]
    pub patch_size: Option<usize>,
    /// Overlap width in pixels [default: round(patch / 6), at least 2]
    #[arg(long)]
    pub overlap: Option<usize>,
    /// Minimum fraction of rain pixels in a sampled window [default: 0.6]
    #[arg(long = "threshold")]
    pub coverage_threshold: Option<f64>,
    /// Number of residual patches drawn from the exemplar [default: 2000]
    #[arg(long = "bank")]
    pub bank_count: Option<usize>,
    /// Seam feathering radius in pixels, 0 for a hard cut [default: 1]
    #[arg(long)]
    pub feather: Option<usize>,
    /// Random seed [default: $RAINWEAVE_SEED, else 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(rainweave::Error::from)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
    }

    fn or(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            patch_size: self.patch_size.or(lower.patch_size),
            overlap: self.overlap.or(lower.overlap),
            coverage_threshold: self.coverage_threshold.or(lower.coverage_threshold),
            bank_count: self.bank_count.or(lower.bank_count),
            feather: self.feather.or(lower.feather),
            seed: self.seed.or(lower.seed),
        }
    }
}

/// Resolves flags over an optional config file over `env_seed` over defaults.
pub fn resolve(
    flags: &ConfigLayer,
    file: Option<&ConfigLayer>,
    env_seed: Option<&str>,
) -> Result<TransferConfig, CliError> {
    let merged = flags.clone().or(file.cloned().unwrap_or_default());
    let defaults = TransferConfig::default();
    let seed = match merged.seed {
        Some(s) => s,
        None => match env_seed {
            Some(raw) => raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{SEED_ENV}={raw:?} is not an unsigned 64-bit integer"
                ))
            })?,
            None => defaults.seed,
        },
    };
    let patch_size = merged.patch_size.unwrap_or(defaults.patch_size);
    let cfg = TransferConfig {
        patch_size,
        overlap: merged
            .overlap
            .unwrap_or_else(|| default_overlap(patch_size)),
        coverage_threshold: merged
            .coverage_threshold
            .unwrap_or(defaults.coverage_threshold),
        bank_count: merged.bank_count.unwrap_or(defaults.bank_count),
        feather: merged.feather.unwrap_or(defaults.feather),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads the config file (if any) and the seed variable, then resolves.
pub fn load(flags: &ConfigLayer, config_path: Option<&Path>) -> Result<TransferConfig, CliError> {
    let file = config_path.map(ConfigLayer::from_file).transpose()?;
    let env = std::env::var(SEED_ENV).ok();
    resolve(flags, file.as_ref(), env.as_deref())
}
