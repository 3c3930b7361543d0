//! Run directory index with content hashes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nse_solver::SolverConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Git-style blob hash: SHA-256 over `"blob <len>\0"` followed by the content.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(blob_hash(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotEntry {
    pub index: usize,
    pub time: f64,
    /// Path relative to the run directory.
    pub file: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactEntry {
    pub file: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: SolverConfig,
    pub snapshots: Vec<SnapshotEntry>,
    pub artifacts: Vec<ArtifactEntry>,
}

impl RunManifest {
    pub fn new(config: SolverConfig) -> Self {
        RunManifest {
            config,
            snapshots: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn path(run_dir: &Path) -> PathBuf {
        run_dir.join(MANIFEST_FILE)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, run_dir: &Path) -> Result<()> {
        let path = Self::path(run_dir);
        fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))
    }

    pub fn read(run_dir: &Path) -> Result<Self> {
        let path = Self::path(run_dir);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }

    /// Records a file already written inside `run_dir`.
    pub fn add_artifact(&mut self, run_dir: &Path, file: &str) -> Result<()> {
        let hash = hash_file(&run_dir.join(file))?;
        self.artifacts.retain(|a| a.file != file);
        self.artifacts.push(ArtifactEntry {
            file: file.to_string(),
            hash,
        });
        self.artifacts.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(())
    }

    /// Every listed file exists and matches its hash.
    pub fn verify(&self, run_dir: &Path) -> Result<()> {
        let entries = self
            .snapshots
            .iter()
            .map(|s| (&s.file, &s.hash))
            .chain(self.artifacts.iter().map(|a| (&a.file, &a.hash)));
        for (file, hash) in entries {
            let path = run_dir.join(file);
            if !path.exists() {
                return Err(Error::Manifest(format!(
                    "{} is listed but missing",
                    path.display()
                )));
            }
            let actual = hash_file(&path)?;
            if &actual != hash {
                return Err(Error::Manifest(format!(
                    "{}: hash {actual} does not match manifest {hash}",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nse_solver::InitialCondition;
    use crate::spectral_field::GridSpec;

    #[test]
    fn blob_hash_framing() {
        // printf 'blob 0\0' | sha256sum
        assert_eq!(
            blob_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
        assert_ne!(blob_hash(b"a"), blob_hash(b"b"));
    }

    #[test]
    fn verify_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig {
            grid: GridSpec::new(8).unwrap(),
            nu: 0.1,
            dt: 0.01,
            t_end: 0.1,
            snapshot_interval: 0.1,
            initial_condition: InitialCondition::TaylorGreen { amplitude: 1.0 },
        };
        let mut m = RunManifest::new(cfg);
        fs::write(dir.path().join("x.csv"), "a,b\n").unwrap();
        m.add_artifact(dir.path(), "x.csv").unwrap();
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        back.verify(dir.path()).unwrap();
        fs::write(dir.path().join("x.csv"), "a,c\n").unwrap();
        assert!(matches!(back.verify(dir.path()), Err(Error::Manifest(_))));
        fs::remove_file(dir.path().join("x.csv")).unwrap();
        assert!(matches!(back.verify(dir.path()), Err(Error::Manifest(_))));
    }
}
