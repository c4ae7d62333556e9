//! Run configuration and persistence.
//!
//! Every command materializes a [`RunRecord`]: the canonical configuration,
//! timestamps, named verdicts and a content-hashed manifest of every file it
//! wrote. `run.json` is written last, as the commit point of the run.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Canonical invocation record: verb plus a flat, sorted parameter map.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64, out_dir: Option<&Path>) -> Self {
        RunConfig {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            out_dir: out_dir.map(|p| p.to_path_buf()),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
        self
    }
}

/// One named check: observed value against its pinned tolerance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheckVerdict {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Everything needed to audit one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub started: String,
    pub finished: String,
    pub artifact_version: String,
    pub verdicts: BTreeMap<String, CheckVerdict>,
    /// Relative path -> sha256 of every file written by the run.
    pub files: BTreeMap<String, String>,
}

impl RunRecord {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }
}

/// Collects output files (hashing as it goes) and writes `run.json` last.
pub struct RunWriter {
    root: Option<PathBuf>,
    config: RunConfig,
    started: String,
    verdicts: BTreeMap<String, CheckVerdict>,
    files: BTreeMap<String, String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunWriter {
    /// A writer rooted at the config's output directory (if any).
    pub fn new(config: RunConfig) -> Result<Self> {
        let root = config.out_dir.clone();
        if let Some(dir) = &root {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
        }
        Ok(RunWriter {
            root,
            config,
            started: now(),
            verdicts: BTreeMap::new(),
            files: BTreeMap::new(),
        })
    }

    pub fn out_dir(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Writes one file under the run root and records its hash.
    pub fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let root = self
            .root
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("command has no output directory"))?;
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.files
            .insert(rel.to_string(), hex::encode(hasher.finalize()));
        Ok(())
    }

    pub fn verdict(&mut self, name: &str, pass: bool, value: f64, tolerance: f64) {
        self.verdicts
            .insert(name.to_string(), CheckVerdict { pass, value, tolerance });
    }

    /// Commits `run.json` (when rooted) and returns the record.
    pub fn finish(self) -> Result<RunRecord> {
        let record = RunRecord {
            config: self.config,
            started: self.started,
            finished: now(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            verdicts: self.verdicts,
            files: self.files,
        };
        if let Some(root) = &self.root {
            let json = serde_json::to_string_pretty(&record)?;
            fs::write(root.join("run.json"), json)?;
        }
        Ok(record)
    }
}

/// Two-column CSV helper used by the plot emitters.
pub fn two_column_csv(x_name: &str, y_name: &str, xs: &[f64], ys: &[f64]) -> String {
    use std::fmt::Write as _;
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}
