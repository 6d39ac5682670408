pub mod compare;
pub mod lemmas;
pub mod plotdata;
pub mod simulate;
pub mod theory;

use std::collections::BTreeMap;
use std::time::Instant;

use crate::config::LoadedConfig;
use crate::manifest::{CommandRecord, RunManifest, TruncationSummary};
use crate::output::OutputSink;
use crate::{CliResult, RunOptions};

/// Collects what a subcommand wrote and records it in the manifest.
pub(crate) struct Session {
    pub sink: OutputSink,
    started: Instant,
    pub per_seed: BTreeMap<u64, Vec<String>>,
    pub truncation: Option<TruncationSummary>,
    pub warnings: Vec<String>,
}

impl Session {
    pub fn open(opts: &RunOptions) -> CliResult<Self> {
        Ok(Self {
            sink: OutputSink::new(&opts.out)?,
            started: Instant::now(),
            per_seed: BTreeMap::new(),
            truncation: None,
            warnings: vec![],
        })
    }

    pub fn finish(self, command: &str, cfg: &LoadedConfig) -> CliResult<()> {
        let root = self.sink.root().to_path_buf();
        let rec = CommandRecord {
            config_hash: cfg.hash.clone(),
            files: self.sink.into_records(),
            per_seed: self.per_seed,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            truncation: self.truncation,
            warnings: self.warnings,
        };
        RunManifest::record(&root, command, rec)
    }
}
