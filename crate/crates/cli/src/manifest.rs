use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Replay record embedded in every command output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Input role to SHA-256 of the file bytes, or of `name:<name>` for built-ins.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            seed,
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(&mut self, role: &str, digest: &str) -> &mut Self {
        self.inputs.insert(role.to_string(), digest.to_string());
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
