//! Run manifest: resolved config echo, tool version, wall clock, and a
//! checksum per output so identical runs are verifiable byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub timestamp_unix_s: u64,
    pub config: String,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

impl RunManifest {
    pub fn collect(
        command: &str,
        seed: u64,
        threads: usize,
        wall_clock_s: f64,
        config_echo: String,
        outputs: &[PathBuf],
    ) -> Result<Self> {
        let mut records = Vec::with_capacity(outputs.len());
        for p in outputs {
            records.push(OutputRecord {
                path: p
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string()),
                sha256: sha256_file(p)?,
            });
        }
        let timestamp_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            tool: "qtm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            threads,
            wall_clock_s,
            timestamp_unix_s,
            config: config_echo,
            outputs: records,
        })
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).context("serializing manifest")?;
        fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
