//! Run-to-run comparison: per-column maximum relative differences of the
//! CSV files two run directories share. Used for regression pinning and for
//! step/resolution convergence studies.

use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::plots::parse_numeric_csv;
use crate::UsageError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ColumnDiff {
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDiff {
    pub rows: usize,
    pub columns: BTreeMap<String, ColumnDiff>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub files: BTreeMap<String, FileDiff>,
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
    /// Largest relative difference over all shared files and columns.
    pub max_rel: f64,
}

fn collect_csvs(root: &Path, below: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in std::fs::read_dir(below)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_csvs(root, &path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(
                path.strip_prefix(root)
                    .expect("path under root")
                    .to_string_lossy()
                    .into_owned(),
            );
        }
    }
    Ok(())
}

/// Compares the shared CSVs of two run directories.
///
/// Files must agree in header and row count; mismatches are structured
/// errors, not silent skips.
pub fn compare_runs(a: &Path, b: &Path) -> Result<DiffReport> {
    for dir in [a, b] {
        if !dir.is_dir() {
            return Err(UsageError(format!("{} is not a run directory", dir.display())).into());
        }
    }
    let mut files_a = Vec::new();
    let mut files_b = Vec::new();
    collect_csvs(a, a, &mut files_a)?;
    collect_csvs(b, b, &mut files_b)?;
    files_a.sort();
    files_b.sort();

    let set_b: std::collections::BTreeSet<_> = files_b.iter().cloned().collect();
    let set_a: std::collections::BTreeSet<_> = files_a.iter().cloned().collect();
    let mut report = DiffReport {
        files: BTreeMap::new(),
        only_in_a: files_a.iter().filter(|f| !set_b.contains(*f)).cloned().collect(),
        only_in_b: files_b.iter().filter(|f| !set_a.contains(*f)).cloned().collect(),
        max_rel: 0.0,
    };

    for rel in files_a.iter().filter(|f| set_b.contains(*f)) {
        let (ha, ca) = parse_numeric_csv(&std::fs::read_to_string(PathBuf::from(a).join(rel))?)
            .with_context(|| format!("{rel} in {}", a.display()))?;
        let (hb, cb) = parse_numeric_csv(&std::fs::read_to_string(PathBuf::from(b).join(rel))?)
            .with_context(|| format!("{rel} in {}", b.display()))?;
        if ha != hb {
            anyhow::bail!("{rel}: incompatible schemas ({ha:?} vs {hb:?})");
        }
        let rows = ca.first().map(|c| c.len()).unwrap_or(0);
        if cb.first().map(|c| c.len()).unwrap_or(0) != rows {
            anyhow::bail!("{rel}: row counts differ");
        }
        let mut columns = BTreeMap::new();
        for (name, (va, vb)) in ha.iter().zip(ca.iter().zip(&cb)) {
            let mut d = ColumnDiff {
                max_abs: 0.0,
                max_rel: 0.0,
            };
            for (&x, &y) in va.iter().zip(vb) {
                let abs = (x - y).abs();
                let scale = x.abs().max(y.abs());
                d.max_abs = d.max_abs.max(abs);
                if scale > 0.0 {
                    d.max_rel = d.max_rel.max(abs / scale);
                }
            }
            report.max_rel = report.max_rel.max(d.max_rel);
            columns.insert(name.clone(), d);
        }
        report.files.insert(rel.clone(), FileDiff { rows, columns });
    }
    Ok(report)
}
