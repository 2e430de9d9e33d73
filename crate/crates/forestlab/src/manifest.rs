//! Machine-readable run manifests: enough to reproduce a run bit for bit
//! (config hash, tool version, seed) and to locate its outputs.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// FNV-1a 64 of the raw config file bytes, hex.
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub passed: bool,
    pub outputs: Vec<String>,
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl RunManifest {
    pub fn new(experiment: &str, config_text: &str, seed: u64) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            config_hash: format!("{:016x}", fnv1a64(config_text.as_bytes())),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            passed: false,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
