//! Versioned, fingerprinted artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Fingerprint of a configuration value: SHA-256 of its canonical JSON.
pub fn fingerprint<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes to JSON");
    sha256_hex(&bytes)
}

/// SHA-256 of a file's contents.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub fingerprint: String,
}

impl Header {
    pub fn new<T: Serialize>(config: &T) -> Header {
        Header {
            tool: "lkt".into(),
            version: VERSION.into(),
            fingerprint: fingerprint(config),
        }
    }

    /// One-line form used as a comment in TSV and markdown outputs.
    pub fn line(&self) -> String {
        format!("{} {} config {}", self.tool, self.version, self.fingerprint)
    }
}

/// JSON artifact: header, the configuration that produced it, and the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub header: Header,
    pub config: serde_json::Value,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(config: serde_json::Value, body: T) -> Self {
        Artifact {
            header: Header::new(&config),
            config,
            body,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(Error::json(path.display().to_string()))?;
        text.push('\n');
        write_file(path, text.as_bytes())
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path.display().to_string()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    std::fs::write(path, bytes).map_err(Error::io(path))
}
