//! Run manifests: what a command was asked to do, what it read and wrote.

use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Absolute path.
    pub path: PathBuf,
    /// Lowercase hex SHA-256.
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let mut f = File::open(path)?;
        let mut hasher = Sha256::new();
        let bytes = io::copy(&mut f, &mut hasher)?;
        Ok(FileDigest {
            path: path.canonicalize()?,
            sha256: hex::encode(hasher.finalize()),
            bytes,
        })
    }

    /// Re-hashes the file and compares.
    pub fn verify(&self) -> Result<()> {
        let now = FileDigest::of(&self.path)?;
        if now.sha256 != self.sha256 || now.bytes != self.bytes {
            return Err(Error::InvariantViolation(format!(
                "{} changed since the manifest was written",
                self.path.display()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub engine: String,
    pub format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            engine: env!("CARGO_PKG_VERSION").to_string(),
            format: FORMAT_VERSION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub versions: Versions,
    /// Seconds.
    pub wall_time: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            versions: Versions::default(),
            wall_time: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Checks every recorded digest against the files on disk.
    pub fn verify(&self) -> Result<()> {
        if self.versions.format != FORMAT_VERSION {
            return Err(Error::format(format!(
                "manifest format {} is not supported",
                self.versions.format
            )));
        }
        self.inputs.iter().chain(&self.outputs).try_for_each(FileDigest::verify)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, b"abc").unwrap();
        let d = FileDigest::of(&p).unwrap();
        assert_eq!(
            d.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(d.bytes, 3);
    }

    #[test]
    fn round_trip_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out.csv");
        std::fs::write(&out, "value,count\n1,1\n").unwrap();
        let mut m = RunManifest::new("gaps");
        m.param("order", 1).output(&out).unwrap();
        let mp = dir.path().join("run.json");
        m.write(&mp).unwrap();
        let back = RunManifest::read(&mp).unwrap();
        assert_eq!(back, m);
        back.verify().unwrap();
        std::fs::write(&out, "value,count\n1,2\n").unwrap();
        assert!(matches!(back.verify(), Err(Error::InvariantViolation(_))));
    }
}
