//! Per-run manifest: resolved configuration, grid sizes and output checksums.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRecord {
    pub label: String,
    pub nx: usize,
    pub nt: usize,
    pub detuning_nodes: usize,
    pub dx_cm: f64,
    pub dt_ns: f64,
    pub t_min_ns: f64,
    pub t_max_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub program: String,
    pub version: String,
    pub mode: String,
    pub figure: Option<u8>,
    pub seed: u64,
    pub jobs: usize,
    /// Resolved configuration text; re-parsing it reproduces the run.
    pub config: String,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    pub grids: Vec<GridRecord>,
    pub outputs: Vec<OutputRecord>,
    /// Headline numbers of the run.
    pub summary: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<(u64, String), CliError> {
    let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok((data.len() as u64, hex::encode(Sha256::digest(&data))))
}

/// Checksums each output, in the order given.
pub fn record_outputs(dir: &Path, files: &[PathBuf]) -> Result<Vec<OutputRecord>, CliError> {
    files
        .iter()
        .map(|f| {
            let (bytes, sha256) = sha256_file(&dir.join(f))?;
            Ok(OutputRecord { path: f.to_string_lossy().replace('\\', "/"), bytes, sha256 })
        })
        .collect()
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::io(&path, e.into()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
