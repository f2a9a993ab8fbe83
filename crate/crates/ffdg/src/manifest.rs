//! Run manifest written next to every artifact a command produces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub tool_version: String,
    pub prng: String,
    pub threads: usize,
    pub wall_clock_s: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn hash_files<'a>(paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<Vec<FileHash>> {
    paths
        .into_iter()
        .map(|p| Ok(FileHash { path: p.display().to_string(), sha256: sha256_file(p)? }))
        .collect()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line() as u64, e.to_string()))
    }
}

/// Compares `files` against the output hashes recorded in the manifest at
/// `manifest`, matching by file name. Mismatches are logged as warnings and
/// counted; a missing manifest is not an error.
pub fn verify_against(manifest: &Path, files: &[PathBuf]) -> Result<usize> {
    if !manifest.exists() {
        log::warn!("no manifest at {}; input hashes not verified", manifest.display());
        return Ok(0);
    }
    let recorded = RunManifest::read(manifest)?;
    let mut mismatches = 0;
    for file in files {
        let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let Some(entry) = recorded.outputs.iter().find(|o| Path::new(&o.path).file_name().is_some_and(|n| n == name.as_str())) else {
            continue;
        };
        if sha256_file(file)? != entry.sha256 {
            log::warn!("{} does not match the hash recorded in {}", file.display(), manifest.display());
            mismatches += 1;
        }
    }
    Ok(mismatches)
}
