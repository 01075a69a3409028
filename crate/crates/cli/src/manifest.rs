//! Run manifests written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub artifact_version: String,
    /// Seconds since the Unix epoch. Not an input: two runs with the same
    /// parameters produce the same outputs whatever their timestamps.
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    /// `out.csv` -> `out.csv.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_os_string();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Records `outputs` and writes one manifest beside each of them.
    pub fn write_beside(mut self, outputs: &[&Path]) -> std::io::Result<()> {
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
        let text = serde_json::to_string_pretty(&self).expect("manifest serialises");
        for out in outputs {
            fs::write(Self::path_for(out), &text)?;
        }
        Ok(())
    }
}
