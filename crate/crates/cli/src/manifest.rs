//! `manifest.json`: what each subcommand wrote, from which configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSummary {
    pub reference_j_sim: u32,
    pub j_sim: u32,
    /// Largest fraction of analysis cubes changed by the deepest generations.
    pub max_changed_fraction: BTreeMap<u64, f64>,
    pub warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    pub config_hash: String,
    pub files: Vec<FileRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_seed: BTreeMap<u64, Vec<String>>,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub commands: BTreeMap<String, CommandRecord>,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            tool_version: format!("mfcap {}", env!("CARGO_PKG_VERSION")),
            commands: BTreeMap::new(),
        }
    }
}

impl RunManifest {
    /// The manifest in `dir`, or an empty one when absent or unreadable.
    pub fn load(dir: &Path) -> Self {
        std::fs::read(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|b| serde_json::from_slice::<RunManifest>(&b).ok())
            .map(|mut m| {
                m.tool_version = Self::default().tool_version;
                m
            })
            .unwrap_or_default()
    }

    /// Replaces the record of `command` and rewrites the manifest.
    pub fn record(dir: &Path, command: &str, rec: CommandRecord) -> CliResult<()> {
        let mut m = Self::load(dir);
        m.commands.insert(command.to_string(), rec);
        let mut bytes = serde_json::to_vec_pretty(&m)?;
        bytes.push(b'\n');
        std::fs::write(dir.join(MANIFEST_FILE), bytes)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_accumulate() {
        let dir = tempfile::tempdir().unwrap();
        let rec = |h: &str| CommandRecord {
            config_hash: h.into(),
            files: vec![],
            per_seed: BTreeMap::from([(10, vec!["a".into()]), (2, vec![])]),
            elapsed_seconds: 0.0,
            truncation: None,
            warnings: vec![],
        };
        RunManifest::record(dir.path(), "theory", rec("x")).unwrap();
        RunManifest::record(dir.path(), "simulate", rec("y")).unwrap();
        RunManifest::record(dir.path(), "theory", rec("z")).unwrap();
        let m = RunManifest::load(dir.path());
        assert_eq!(m.commands.len(), 2);
        assert_eq!(m.commands["theory"].config_hash, "z");
        assert_eq!(m.commands["simulate"].per_seed.keys().copied().collect::<Vec<_>>(), vec![2, 10]);
    }
}
