//! Run-directory manifest with content checksums.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::snapshot::sha256_hex;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const RESULT_FILE: &str = "result.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    /// Relative to the run directory.
    pub file: String,
    pub t: f64,
    /// Ledger row the snapshot belongs to.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// False until the command finished writing its outputs.
    pub complete: bool,
    pub snapshots: Vec<SnapshotEntry>,
    /// SHA-256 per file, keyed by relative path.
    pub checksums: BTreeMap<String, String>,
}

impl Manifest {
    pub fn begin(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            complete: false,
            snapshots: Vec::new(),
            checksums: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_atomic(&dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            bail!("{} has no {MANIFEST_FILE}; not a run directory", dir.display());
        }
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
    }

    /// Checksums every file in the listed paths, marks the manifest complete
    /// and writes it.
    pub fn finish(&mut self, dir: &Path, files: &[PathBuf]) -> anyhow::Result<()> {
        self.checksums.clear();
        for rel in files {
            let bytes = std::fs::read(dir.join(rel)).with_context(|| format!("cannot read {}", rel.display()))?;
            self.checksums.insert(rel_key(rel), sha256_hex(&bytes));
        }
        self.complete = true;
        self.write(dir)
    }

    /// Paths whose current content differs from the recorded checksum.
    pub fn verify(&self, dir: &Path) -> anyhow::Result<Vec<String>> {
        let mut bad = Vec::new();
        for (rel, sum) in &self.checksums {
            match std::fs::read(dir.join(rel)) {
                Ok(bytes) if sha256_hex(&bytes) == *sum => {}
                _ => bad.push(rel.clone()),
            }
        }
        Ok(bad)
    }
}

fn rel_key(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finish_records_checksums_and_detects_changes() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "alpha").unwrap();
        std::fs::create_dir(dir.path().join("sub")).unwrap();
        std::fs::write(dir.path().join("sub/b.bin"), [1u8, 2, 3]).unwrap();
        let mut m = Manifest::begin("simulate");
        m.write(dir.path()).unwrap();
        assert!(!Manifest::read(dir.path()).unwrap().complete);
        m.finish(dir.path(), &["a.txt".into(), Path::new("sub").join("b.bin")]).unwrap();
        let back = Manifest::read(dir.path()).unwrap();
        assert!(back.complete);
        assert_eq!(back.checksums.len(), 2);
        assert!(back.checksums.contains_key("sub/b.bin"));
        assert!(back.verify(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("a.txt"), "beta").unwrap();
        assert_eq!(back.verify(dir.path()).unwrap(), vec!["a.txt".to_string()]);
    }

    #[test]
    fn missing_manifest_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let err = Manifest::read(dir.path()).unwrap_err();
        assert!(err.to_string().contains("not a run directory"));
    }
}
