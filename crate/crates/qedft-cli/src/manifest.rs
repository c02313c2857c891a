//! Run manifests: everything needed to reproduce and audit a command.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub status: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    /// Headline numbers; keys are sorted for a stable layout.
    pub scalars: BTreeMap<String, f64>,
    /// SHA-256 of every emitted artifact, keyed by file name.
    pub artifact_sha256: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Canonical resolved configuration text.
    pub config: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config_text: String) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: "ok".to_string(),
            seed,
            wall_time_seconds: 0.0,
            scalars: BTreeMap::new(),
            artifact_sha256: BTreeMap::new(),
            error: None,
            config: config_text,
        }
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.to_string(), value);
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}
