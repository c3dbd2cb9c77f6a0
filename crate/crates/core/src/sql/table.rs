use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::number::Number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(ColumnType::Text),
            "number" => Some(ColumnType::Number),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ctype: ColumnType,
}

impl Column {
    pub fn new(name: impl Into<String>, ctype: ColumnType) -> Self {
        Column { name: name.into(), ctype }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Text(String),
    Number(Number),
    Empty,
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        matches!(self, Cell::Empty)
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self {
            Cell::Number(n) => Some(n),
            _ => None,
        }
    }

    /// Text as it appears in flattened tables and rendered results.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Number(n) => write!(f, "{n}"),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table {table}: row {row} has {got} cells, expected {expected}")]
    RowWidth { table: String, row: usize, got: usize, expected: usize },
    #[error("table {table}: non-numeric cell in number column `{column}` at row {row}")]
    CellType { table: String, column: String, row: usize },
    #[error("table {table}: duplicate column `{column}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table {table}: `{column}` is not a valid column identifier")]
    BadColumnName { table: String, column: String },
    #[error("table {table}: no columns")]
    NoColumns { table: String },
}

/// Tokens that delimit flattened tables; cells never contain them verbatim.
const RESERVED_CELL_TOKENS: [(&str, &str); 3] = [("|", "/"), ("ROW", "row"), ("HEAD", "head")];

/// Collapses whitespace runs to single spaces and rewrites tokens reserved by
/// the flattened-table layout.
pub fn clean_cell_text(raw: &str) -> String {
    raw.split_whitespace()
        .map(|tok| RESERVED_CELL_TOKENS.iter().find(|(r, _)| *r == tok).map_or(tok, |(_, w)| *w))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Column identifiers are `[a-z_][a-z0-9_]*`.
pub fn is_column_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A typed single-table database. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
    renamed_columns: bool,
}

impl Table {
    /// Validates shape and types. Text cells are normalized with
    /// [`clean_cell_text`]; blank text becomes [`Cell::Empty`].
    pub fn new(name: impl Into<String>, columns: Vec<Column>, rows: Vec<Vec<Cell>>) -> Result<Self, TableError> {
        let name = name.into();
        if columns.is_empty() {
            return Err(TableError::NoColumns { table: name });
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !is_column_identifier(&c.name) {
                return Err(TableError::BadColumnName { table: name, column: c.name.clone() });
            }
            if !seen.insert(c.name.as_str()) {
                return Err(TableError::DuplicateColumn { table: name, column: c.name.clone() });
            }
        }
        let mut clean_rows = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != columns.len() {
                return Err(TableError::RowWidth { table: name, row: r, got: row.len(), expected: columns.len() });
            }
            let mut clean = Vec::with_capacity(row.len());
            for (cell, col) in row.into_iter().zip(&columns) {
                let cell = match (cell, col.ctype) {
                    (Cell::Text(s), ColumnType::Text) => {
                        let s = clean_cell_text(&s);
                        if s.is_empty() {
                            Cell::Empty
                        } else {
                            Cell::Text(s)
                        }
                    }
                    (Cell::Number(n), ColumnType::Text) => Cell::Text(n.to_string()),
                    (Cell::Text(_), ColumnType::Number) => {
                        return Err(TableError::CellType { table: name, column: col.name.clone(), row: r })
                    }
                    (cell, _) => cell,
                };
                clean.push(cell);
            }
            clean_rows.push(clean);
        }
        Ok(Table { name, columns, rows: clean_rows, renamed_columns: false })
    }

    pub(crate) fn with_renamed_columns(mut self, renamed: bool) -> Self {
        self.renamed_columns = renamed;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Whether ingestion had to suffix duplicate header names.
    pub fn renamed_columns(&self) -> bool {
        self.renamed_columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Comma-joined column types, e.g. `text,number`.
    pub fn type_signature(&self) -> String {
        self.columns.iter().map(|c| c.ctype.as_str()).collect::<Vec<_>>().join(",")
    }

    /// A copy keeping only `rows` (by index, in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            name: self.name.clone(),
            columns: self.columns.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            renamed_columns: self.renamed_columns,
        }
    }
}

pub fn parse_type_signature(sig: &str) -> Option<Vec<ColumnType>> {
    sig.split(',').map(ColumnType::parse).collect()
}
