// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Provenance record written with every output: enough to rerun the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Command-line arguments after the program name.
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Effective parameters after defaults were resolved.
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: Value::Null,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Sidecar path for a CSV output: `out.csv` -> `out.csv.manifest.json`.
    pub fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    /// Loads a manifest either stored on its own or embedded under a
    /// `manifest` key of a JSON output.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut v: Value =
            serde_json::from_str(&text).map_err(|e| CliError::parse(e.line(), format!("invalid JSON: {e}")))?;
        if let Some(inner) = v.get_mut("manifest") {
            v = inner.take();
        }
        serde_json::from_value(v).map_err(|e| CliError::parse(1, format!("not a run manifest: {e}")))
    }
}
