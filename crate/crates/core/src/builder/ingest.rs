//! WikiSQL tables JSONL: `{"id", "header", "types", "rows", ...}` per line.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::sql::{Cell, Column, ColumnType, Number, Table};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Line { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Table(String),
}

#[derive(Deserialize)]
struct RawTable {
    id: String,
    header: Vec<String>,
    types: Vec<String>,
    rows: Vec<Vec<serde_json::Value>>,
}

/// Lowercases, collapses non-alphanumeric runs to `_`, and prefixes names
/// that would not start with a letter or underscore.
pub fn normalize_header(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for c in raw.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.push(c);
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        return "col".into();
    }
    if out.as_bytes()[0].is_ascii_digit() {
        out.insert(0, 'c');
    }
    out
}

fn raw_cell_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Builds a [`Table`] from one WikiSQL table object.
pub fn table_from_json(json: &str) -> Result<Table, String> {
    let raw: RawTable = serde_json::from_str(json).map_err(|e| e.to_string())?;
    if raw.header.len() != raw.types.len() {
        return Err(format!("table {}: {} headers but {} types", raw.id, raw.header.len(), raw.types.len()));
    }
    let types = raw
        .types
        .iter()
        .map(|t| match t.as_str() {
            "real" | "number" => Ok(ColumnType::Number),
            "text" => Ok(ColumnType::Text),
            other => Err(format!("table {}: unknown column type `{other}`", raw.id)),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut seen = HashSet::new();
    let mut renamed = false;
    let columns: Vec<Column> = raw
        .header
        .iter()
        .zip(&types)
        .map(|(h, &ctype)| {
            let base = normalize_header(h);
            let mut name = base.clone();
            let mut suffix = 2;
            while !seen.insert(name.clone()) {
                renamed = true;
                name = format!("{base}_{suffix}");
                suffix += 1;
            }
            Column::new(name, ctype)
        })
        .collect();

    let mut rows = Vec::with_capacity(raw.rows.len());
    for (r, row) in raw.rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(format!(
                "table {}: row {r} has {} cells, header has {}",
                raw.id,
                row.len(),
                columns.len()
            ));
        }
        rows.push(
            row.iter()
                .zip(&types)
                .map(|(v, t)| {
                    let text = raw_cell_text(v);
                    match t {
                        ColumnType::Number => Number::coerce(&text).map_or(Cell::Empty, Cell::Number),
                        ColumnType::Text => Cell::Text(text),
                    }
                })
                .collect(),
        );
    }
    Table::new(raw.id, columns, rows).map(|t| t.with_renamed_columns(renamed)).map_err(|e| e.to_string())
}

pub fn ingest_wikisql(path: &Path) -> Result<Vec<Table>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    let mut tables = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let table = table_from_json(&line).map_err(|message| IngestError::Line { path: path.into(), line: i + 1, message })?;
        tables.push(table);
    }
    Ok(tables)
}

/// Reads a single table object (possibly pretty-printed) from a file.
pub fn read_table_file(path: &Path) -> Result<Table, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.into(), source })?;
    table_from_json(&text).map_err(|message| IngestError::Line { path: path.into(), line: 1, message })
}
