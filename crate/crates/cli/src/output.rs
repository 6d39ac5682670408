//! File emission with content hashes, and reading back of CSV tables.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::sha256_hex;
use crate::manifest::FileRecord;
use crate::{CliError, CliResult};

/// Shortest round-trip decimal; `inf`, `-inf` and `NaN` spelled out.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes files under one root and remembers what it wrote.
#[derive(Debug)]
pub struct OutputSink {
    root: PathBuf,
    records: Vec<FileRecord>,
}

impl OutputSink {
    pub fn new(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            records: vec![],
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `rel` (forward slashes) and returns `rel`.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<String> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.records.retain(|r| r.path != rel);
        self.records.push(FileRecord {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(rel.to_string())
    }

    pub fn write_csv(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
        self.write(rel, &csv_bytes(header, rows)?)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<String> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    pub fn into_records(self) -> Vec<FileRecord> {
        self.records
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

/// A CSV file held in memory, addressed by column name.
#[derive(Clone, Debug)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        let headers = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Runtime(format!("missing column {name}")))
    }

    pub fn f64s(&self, name: &str) -> CliResult<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|e| CliError::Runtime(format!("bad number {:?} in {name}: {e}", r[c])))
            })
            .collect()
    }

    pub fn strings(&self, name: &str) -> CliResult<Vec<String>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].clone()).collect())
    }
}
