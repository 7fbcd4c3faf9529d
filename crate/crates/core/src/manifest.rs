use std::path::Path;

use serde::{Deserialize, Serialize};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::error::{Error, Result};

/// Record of a completed run: what was asked for, which tool produced it and
/// which files it wrote (relative to the output directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub results: serde_json::Value,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        let timestamp = OffsetDateTime::now_utc()
            .format(&Rfc3339)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            command: command.to_string(),
            config: serde_json::to_value(config).map_err(|e| Error::Serialize(e.to_string()))?,
            results: serde_json::Value::Null,
            outputs: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Deserializes the echoed configuration.
    pub fn config_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_value(self.config.clone()).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Names of listed outputs missing from `dir`.
    pub fn missing_outputs(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|name| !dir.join(name).is_file())
            .cloned()
            .collect()
    }
}
