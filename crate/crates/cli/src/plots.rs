//! Plot-data emission: two-column CSV panels recomputed from the persisted
//! run files, never from hidden state.

use anyhow::{Context, Result};
use std::path::Path;

use crate::run::{two_column_csv, RunWriter};

/// Parses a headered numeric CSV into column names and columns.
pub fn parse_numeric_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("empty CSV"))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect::<Vec<_>>();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            anyhow::bail!("row {} has {} fields, header has {}", i + 2, fields.len(), header.len());
        }
        for (c, f) in fields.iter().enumerate() {
            columns[c].push(
                f.trim()
                    .parse::<f64>()
                    .with_context(|| format!("row {}, column {}", i + 2, header[c]))?,
            );
        }
    }
    Ok((header, columns))
}

/// Splits a persisted trajectory CSV into one `plot_data/<column>.csv` panel
/// per dependent column (first column is the abscissa).
pub fn emit_trajectory_panels(writer: &mut RunWriter, traj_rel: &str) -> Result<usize> {
    let root = writer
        .out_dir()
        .ok_or_else(|| anyhow::anyhow!("no output directory"))?
        .to_path_buf();
    let text = std::fs::read_to_string(root.join(traj_rel))?;
    let (header, columns) = parse_numeric_csv(&text)?;
    if header.len() < 2 || columns[0].is_empty() {
        eprintln!("warning: {traj_rel} has no plottable series");
        return Ok(0);
    }
    let x_name = &header[0];
    let xs = &columns[0];
    let mut emitted = 0;
    for c in 1..header.len() {
        let rel = format!("plot_data/{}.csv", header[c]);
        writer.write(&rel, &two_column_csv(x_name, &header[c], xs, &columns[c]))?;
        emitted += 1;
    }
    Ok(emitted)
}

/// Emits the coefficient panels (`dk_diff`, `ak`, `epsk`, `lamb1`, `lamb2`)
/// from a persisted coefficient table.
pub fn emit_table_panels(writer: &mut RunWriter, table_path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(table_path)
        .with_context(|| format!("reading {}", table_path.display()))?;
    let (header, columns) = parse_numeric_csv(&text)?;
    let col = |name: &str| -> Result<&Vec<f64>> {
        header
            .iter()
            .position(|h| h == name)
            .map(|i| &columns[i])
            .ok_or_else(|| anyhow::anyhow!("table lacks column {name}"))
    };
    let ks = col("k")?;
    if ks.is_empty() {
        eprintln!("warning: empty coefficient table, no panels emitted");
        return Ok(0);
    }
    let panels = [
        ("dk_diff", col("diff_k")?),
        ("ak", col("a_k")?),
        ("epsk", col("eps_k")?),
        ("lamb1", col("lam1")?),
        ("lamb2", col("lam2")?),
    ];
    for (name, ys) in panels {
        let rel = format!("plot_data/{name}.csv");
        writer.write(&rel, &two_column_csv("k", name, ks, ys))?;
    }
    Ok(5)
}
