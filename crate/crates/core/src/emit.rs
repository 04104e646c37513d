//! Summary output: pretty JSON, per-replica JSONL and CSV tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::experiment::{Summary, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Pretty JSON with a trailing newline. Map keys are emitted sorted.
pub fn summary_json(summary: &Summary) -> Result<String> {
    Ok(serde_json::to_string_pretty(summary)? + "\n")
}

pub fn replicas_jsonl(summary: &Summary) -> Result<String> {
    let mut out = String::new();
    for r in &summary.replicas {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Header row of column names, then one record per row. Floats use the
/// shortest representation that parses back to the same value.
pub fn table_to_csv(table: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(param(format!("row has {} fields, header {}", row.len(), table.columns.len())));
        }
        w.write_record(row.iter().map(f64::to_string))?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn table_from_csv(s: &str) -> Result<Table> {
    let mut r = csv::Reader::from_reader(s.as_bytes());
    let columns = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| param(format!("bad number {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

/// Writes `summary.json` (and `replicas.jsonl` when `jsonl`) or `table.csv`
/// into `dir`, creating it if needed. Returns the written paths.
pub fn emit(summary: &Summary, dir: &Path, format: Format, jsonl: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let p = dir.join("summary.json");
            write_file(&p, &summary_json(summary)?)?;
            written.push(p);
            if jsonl {
                let p = dir.join("replicas.jsonl");
                write_file(&p, &replicas_jsonl(summary)?)?;
                written.push(p);
            }
        }
        Format::Csv => {
            let table = summary.table.as_ref().ok_or_else(|| param("experiment has no tabular output"))?;
            let p = dir.join("table.csv");
            write_file(&p, &table_to_csv(table)?)?;
            written.push(p);
        }
    }
    Ok(written)
}
