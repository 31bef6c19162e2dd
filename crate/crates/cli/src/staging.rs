//! Write-to-temp, rename-on-success output handling.

use std::fs;
use std::path::{Path, PathBuf};

use rainweave::image::encode_png;
use rainweave::ImageBuffer;
use serde::Serialize;
use tempfile::TempDir;

use crate::manifest::{sha256_hex, OutputFile};
use crate::CliError;

/// Files are written into a hidden directory inside the output directory and
/// only moved into place by [`Staging::commit`]. Dropping an uncommitted
/// staging area removes everything written so far.
pub(crate) struct Staging {
    dir: TempDir,
    out: PathBuf,
    files: Vec<String>,
    dirs: Vec<String>,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out)?;
        let dir = tempfile::Builder::new()
            .prefix(".rainweave-staging-")
            .tempdir_in(out)?;
        Ok(Staging {
            dir,
            out: out.to_path_buf(),
            files: Vec::new(),
            dirs: Vec::new(),
        })
    }

    /// Makes sure `rel` exists as a directory after commit, even if empty.
    pub fn ensure_dir(&mut self, rel: &str) -> Result<(), CliError> {
        fs::create_dir_all(self.dir.path().join(rel))?;
        self.dirs.push(rel.to_string());
        Ok(())
    }

    fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    pub fn write_png(&mut self, rel: &str, img: &ImageBuffer) -> Result<OutputFile, CliError> {
        let mut bytes = Vec::new();
        encode_png(img, &mut bytes)?;
        self.write_bytes(rel, &bytes)?;
        Ok(OutputFile {
            path: rel.to_string(),
            sha256: sha256_hex(&bytes),
        })
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("serializing {rel}: {e}")))?;
        text.push('\n');
        self.write_bytes(rel, text.as_bytes())
    }

    pub fn commit(self) -> Result<(), CliError> {
        for rel in &self.dirs {
            fs::create_dir_all(self.out.join(rel))?;
        }
        for rel in &self.files {
            let dst = self.out.join(rel);
            if let Some(parent) = dst.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(self.dir.path().join(rel), dst)?;
        }
        Ok(())
    }
}
