//! Run manifests and config fingerprints: every artifact records the
//! resolved configuration that produced it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Short hex digest of a config's canonical JSON encoding.
pub fn fingerprint<C: Serialize>(cfg: &C) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
}

/// Written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub configs: BTreeMap<String, serde_json::Value>,
    pub input_digests: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub host: HostInfo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            configs: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            host: HostInfo {
                os: std::env::consts::OS.to_string(),
                arch: std::env::consts::ARCH.to_string(),
                threads: rayon::current_num_threads(),
            },
        }
    }

    pub fn add_config<C: Serialize>(&mut self, name: &str, cfg: &C) {
        self.configs.insert(
            name.to_string(),
            serde_json::to_value(cfg).expect("config serializes"),
        );
    }

    pub fn add_input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.input_digests
            .insert(name.to_string(), file_digest(path)?);
        Ok(())
    }

    /// Stamp the end time and write `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.finished_unix_ms = now_ms();
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        let tmp = path.with_extension("tmp");
        std::fs::write(
            &tmp,
            serde_json::to_string_pretty(&self).map_err(|e| Error::format(e.to_string()))?,
        )?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }
}

pub fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        #[derive(Serialize)]
        struct C {
            a: u32,
        }
        assert_eq!(fingerprint(&C { a: 1 }), fingerprint(&C { a: 1 }));
        assert_ne!(fingerprint(&C { a: 1 }), fingerprint(&C { a: 2 }));
    }
}
