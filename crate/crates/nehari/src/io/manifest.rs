//! Deterministic run manifests.
//!
//! Every CLI run emits a manifest next to its outputs: the command, a
//! canonical config snapshot, the seed and the tool version, plus timestamps
//! and output paths. The manifest hash covers only the reproducibility
//! inputs (command, config, seed, version) — never timestamps — so repeated
//! runs stamp their CSVs with the same hash and produce identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    /// Canonical key=value snapshot of the effective configuration.
    pub config_snapshot: String,
    pub seed: u64,
    pub version: String,
    /// Unix seconds at manifest creation.
    pub created_unix: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_snapshot: impl Into<String>, seed: u64) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.into(),
            config_snapshot: config_snapshot.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// FNV-1a over the reproducibility inputs.
    pub fn hash_hex(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.command.as_bytes());
        eat(&[0]);
        eat(self.config_snapshot.as_bytes());
        eat(&[0]);
        eat(&self.seed.to_le_bytes());
        eat(self.version.as_bytes());
        format!("{h:016x}")
    }

    /// Writes the manifest as plain text next to the outputs.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "command = {}", self.command)?;
        writeln!(out, "version = {}", self.version)?;
        writeln!(out, "seed = {}", self.seed)?;
        writeln!(out, "hash = {}", self.hash_hex())?;
        writeln!(out, "created_unix = {}", self.created_unix)?;
        for o in &self.outputs {
            writeln!(out, "output = {}", o.display())?;
        }
        writeln!(out, "[config]")?;
        for line in self.config_snapshot.lines() {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }
}
