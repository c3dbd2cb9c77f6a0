//! Table linearization.
//!
//! Layout, with tokens separated by single spaces:
//!
//! ```text
//! HEAD : c1 | c2 | ... | cn ROW 1 : v11 | v12 | ... | v1n ROW 2 : ...
//! ```
//!
//! Column names are one token each; a cell contributes as many tokens as its
//! text has (an empty cell contributes none). Tables whose layout exceeds the
//! token budget lose uniformly random rows until it fits; remaining rows are
//! renumbered from 1.

use rand::Rng;
use thiserror::Error;

use crate::sql::{Cell, Column, ColumnType, Number, Table};

pub const DEFAULT_BUDGET: usize = 450;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("table {table}: budget {budget} cannot hold the header and one row ({needed} tokens)")]
    BudgetTooSmall { table: String, budget: usize, needed: usize },
    #[error("flattened table: {0}")]
    Parse(String),
}

/// Token range `[token_start, token_end)` holding the cell at (`row`, `col`);
/// `row` indexes the kept rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSpan {
    pub row: usize,
    pub col: usize,
    pub token_start: usize,
    pub token_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenedDb {
    pub text: String,
    pub cell_spans: Vec<CellSpan>,
    pub token_count: usize,
    pub dropped_rows: usize,
    /// Original indices of the rows that were kept, in order.
    pub kept_rows: Vec<usize>,
}

fn header_tokens(t: &Table) -> usize {
    2 + 2 * t.columns().len() - 1
}

fn row_tokens(row: &[Cell]) -> usize {
    3 + row.len() - 1 + row.iter().map(|c| c.render().split_whitespace().count()).sum::<usize>()
}

struct Writer {
    text: String,
    tokens: usize,
}

impl Writer {
    fn push(&mut self, tok: &str) {
        if self.tokens > 0 {
            self.text.push(' ');
        }
        self.text.push_str(tok);
        self.tokens += 1;
    }
}

pub fn flatten<R: Rng>(t: &Table, budget: usize, rng: &mut R) -> Result<FlattenedDb, FlattenError> {
    let costs: Vec<usize> = t.rows().iter().map(|r| row_tokens(r)).collect();
    let mut kept: Vec<usize> = (0..t.rows().len()).collect();
    let mut total = header_tokens(t) + costs.iter().sum::<usize>();
    while total > budget && kept.len() > 1 {
        let victim = kept.remove(rng.gen_range(0..kept.len()));
        total -= costs[victim];
    }
    if total > budget {
        return Err(FlattenError::BudgetTooSmall { table: t.name().to_string(), budget, needed: total });
    }
    let flat = render_rows(t, &kept);
    debug_assert_eq!(flat.token_count, total);
    Ok(flat)
}

/// Renders the header and the given rows without any budget.
pub fn render_rows(t: &Table, kept: &[usize]) -> FlattenedDb {
    let mut w = Writer { text: String::new(), tokens: 0 };
    w.push("HEAD");
    w.push(":");
    for (i, c) in t.columns().iter().enumerate() {
        if i > 0 {
            w.push("|");
        }
        w.push(&c.name);
    }
    let mut spans = Vec::new();
    for (k, &r) in kept.iter().enumerate() {
        w.push("ROW");
        w.push(&(k + 1).to_string());
        w.push(":");
        for (c, cell) in t.rows()[r].iter().enumerate() {
            if c > 0 {
                w.push("|");
            }
            let start = w.tokens;
            for tok in cell.render().split_whitespace() {
                w.push(tok);
            }
            spans.push(CellSpan { row: k, col: c, token_start: start, token_end: w.tokens });
        }
    }
    FlattenedDb {
        token_count: w.tokens,
        text: w.text,
        cell_spans: spans,
        dropped_rows: t.rows().len() - kept.len(),
        kept_rows: kept.to_vec(),
    }
}

/// Reads flattened text back into a typed table, given the column types.
pub fn parse_flattened(text: &str, name: &str, types: &[ColumnType]) -> Result<(Table, Vec<CellSpan>), FlattenError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let err = |pos: usize, what: &str| FlattenError::Parse(format!("token {pos}: expected {what}"));
    let mut pos = 0;
    let expect = |pos: &mut usize, tok: &str| {
        if toks.get(*pos) == Some(&tok) {
            *pos += 1;
            Ok(())
        } else {
            Err(err(*pos, &format!("`{tok}`")))
        }
    };
    expect(&mut pos, "HEAD")?;
    expect(&mut pos, ":")?;
    let mut columns = Vec::with_capacity(types.len());
    for (i, &ctype) in types.iter().enumerate() {
        if i > 0 {
            expect(&mut pos, "|")?;
        }
        let name = toks.get(pos).ok_or_else(|| err(pos, "column name"))?;
        columns.push(Column::new(*name, ctype));
        pos += 1;
    }
    let mut rows = Vec::new();
    let mut spans = Vec::new();
    while pos < toks.len() {
        let k = rows.len();
        expect(&mut pos, "ROW")?;
        expect(&mut pos, &(k + 1).to_string())?;
        expect(&mut pos, ":")?;
        let mut row = Vec::with_capacity(types.len());
        for (c, &ctype) in types.iter().enumerate() {
            let last = c + 1 == types.len();
            if c > 0 {
                expect(&mut pos, "|")?;
            }
            let start = pos;
            while pos < toks.len() && toks[pos] != "ROW" && (last || toks[pos] != "|") {
                pos += 1;
            }
            let value = toks[start..pos].join(" ");
            spans.push(CellSpan { row: k, col: c, token_start: start, token_end: pos });
            row.push(match (value.is_empty(), ctype) {
                (true, _) => Cell::Empty,
                (false, ColumnType::Text) => Cell::Text(value),
                (false, ColumnType::Number) => Cell::Number(
                    value.parse::<Number>().map_err(|_| err(start, &format!("number, found `{value}`")))?,
                ),
            });
        }
        rows.push(row);
    }
    let table = Table::new(name, columns, rows).map_err(|e| FlattenError::Parse(e.to_string()))?;
    Ok((table, spans))
}
