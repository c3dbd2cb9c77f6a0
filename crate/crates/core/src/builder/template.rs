//! SQL templates with `[COLn]` / `[VALn]` placeholders.
//!
//! A pattern is SQL text in which `[COLn]` names a slot bound to a distinct
//! table column, `[VALn]` is replaced by a cell drawn from the column bound
//! to `COLn`, and `{A|B|...}` picks one alternative uniformly.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sql::{check_query, parse_sql, Cell, ColumnType, SqlQuery, Table, Value};

const DEFAULT_TEMPLATES: &str = include_str!("../../templates/default.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Arithmetic,
    Superlative,
    Comparative,
    Aggregation,
    Union,
    Nested,
    PlainSelect,
}

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::Arithmetic,
        Shape::Superlative,
        Shape::Comparative,
        Shape::Aggregation,
        Shape::Union,
        Shape::Nested,
        Shape::PlainSelect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Arithmetic => "arithmetic",
            Shape::Superlative => "superlative",
            Shape::Comparative => "comparative",
            Shape::Aggregation => "aggregation",
            Shape::Union => "union",
            Shape::Nested => "nested",
            Shape::PlainSelect => "plain_select",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotType {
    Text,
    Number,
    Any,
}

impl SlotType {
    fn admits(self, ctype: ColumnType) -> bool {
        match self {
            SlotType::Any => true,
            SlotType::Text => ctype == ColumnType::Text,
            SlotType::Number => ctype == ColumnType::Number,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub ctype: SlotType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub id: String,
    pub shape: Shape,
    pub pattern: String,
    pub slots: Vec<SlotSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template {template}: no compatible column for slot {slot}")]
    NoCompatibleColumns { template: String, slot: String },
    #[error("template {template}: {message}")]
    Malformed { template: String, message: String },
    #[error("template {template}: instantiation is ill-typed: {message}")]
    IllTyped { template: String, message: String },
    #[error("{0}")]
    Load(String),
}

enum Piece<'a> {
    Text(&'a str),
    Col(&'a str),
    Val(&'a str),
    Choice(Vec<&'a str>),
}

fn pieces(pattern: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find(['[', '{']) {
        if open > 0 {
            out.push(Piece::Text(&rest[..open]));
        }
        let close_ch = if rest.as_bytes()[open] == b'[' { ']' } else { '}' };
        let close = rest[open..].find(close_ch).ok_or_else(|| format!("unclosed `{}`", &rest[open..open + 1]))? + open;
        let inner = &rest[open + 1..close];
        out.push(if close_ch == '}' {
            Piece::Choice(inner.split('|').collect())
        } else if let Some(n) = inner.strip_prefix("COL") {
            Piece::Col(n)
        } else if let Some(n) = inner.strip_prefix("VAL") {
            Piece::Val(n)
        } else {
            return Err(format!("unknown placeholder `[{inner}]`"));
        });
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    Ok(out)
}

impl QueryTemplate {
    /// Checks that every placeholder refers to a declared `COLn` slot.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let malformed = |message: String| TemplateError::Malformed { template: self.id.clone(), message };
        let declared: HashSet<&str> = self.slots.iter().filter_map(|s| s.name.strip_prefix("COL")).collect();
        if declared.len() != self.slots.len() {
            return Err(malformed("slot names must be distinct and start with COL".into()));
        }
        for piece in pieces(&self.pattern).map_err(malformed)? {
            match piece {
                Piece::Col(n) | Piece::Val(n) if !declared.contains(n) => {
                    return Err(malformed(format!("placeholder {n} has no COL{n} slot")))
                }
                Piece::Choice(alts) if alts.len() < 2 => return Err(malformed("choice needs two alternatives".into())),
                _ => {}
            }
        }
        Ok(())
    }
}

pub fn default_templates() -> Vec<QueryTemplate> {
    serde_json::from_str(DEFAULT_TEMPLATES).expect("bundled templates parse")
}

/// Reads a JSON array of templates and validates each.
pub fn load_templates(path: &Path) -> Result<Vec<QueryTemplate>, TemplateError> {
    let text = std::fs::read_to_string(path).map_err(|e| TemplateError::Load(format!("{}: {e}", path.display())))?;
    let templates: Vec<QueryTemplate> =
        serde_json::from_str(&text).map_err(|e| TemplateError::Load(format!("{}: {e}", path.display())))?;
    templates.iter().try_for_each(QueryTemplate::validate)?;
    Ok(templates)
}

fn literal(cell: &Cell) -> String {
    match cell {
        Cell::Number(n) => Value::Number(n.clone()).to_string(),
        Cell::Text(s) => Value::Text(s.clone()).to_string(),
        Cell::Empty => unreachable!("values are drawn from non-empty cells"),
    }
}

/// Fills slots with distinct compatible columns (uniformly; typed slots
/// first), values with
/// uniformly drawn non-empty cells of the bound column, and choices
/// uniformly; then parses and type-checks the result.
pub fn instantiate<R: Rng>(tpl: &QueryTemplate, t: &Table, rng: &mut R) -> Result<SqlQuery, TemplateError> {
    let malformed = |message: String| TemplateError::Malformed { template: tpl.id.clone(), message };
    let parts = pieces(&tpl.pattern).map_err(malformed)?;
    let valued: HashSet<&str> = parts.iter().filter_map(|p| if let Piece::Val(n) = p { Some(*n) } else { None }).collect();

    let mut bound: HashMap<&str, usize> = HashMap::new();
    // typed slots claim columns before unconstrained ones
    let mut order: Vec<&SlotSpec> = tpl.slots.iter().collect();
    order.sort_by_key(|s| s.ctype == SlotType::Any);
    for slot in order {
        let key = slot.name.strip_prefix("COL").unwrap_or(&slot.name);
        let needs_value = valued.contains(key);
        let candidates: Vec<usize> = t
            .columns()
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                slot.ctype.admits(c.ctype)
                    && !bound.values().any(|b| b == i)
                    && (!needs_value || t.rows().iter().any(|r| !r[*i].is_empty()))
            })
            .map(|(i, _)| i)
            .collect();
        if candidates.is_empty() {
            return Err(TemplateError::NoCompatibleColumns { template: tpl.id.clone(), slot: slot.name.clone() });
        }
        bound.insert(key, candidates[rng.gen_range(0..candidates.len())]);
    }

    let mut sql = String::with_capacity(tpl.pattern.len() + 32);
    for piece in &parts {
        match piece {
            Piece::Text(s) => sql.push_str(s),
            Piece::Choice(alts) => sql.push_str(alts[rng.gen_range(0..alts.len())]),
            Piece::Col(n) => {
                let col = *bound.get(n).ok_or_else(|| malformed(format!("unbound COL{n}")))?;
                sql.push_str(&t.columns()[col].name);
            }
            Piece::Val(n) => {
                let col = *bound.get(n).ok_or_else(|| malformed(format!("unbound VAL{n}")))?;
                let cells: Vec<&Cell> = t.rows().iter().map(|r| &r[col]).filter(|c| !c.is_empty()).collect();
                sql.push_str(&literal(cells[rng.gen_range(0..cells.len())]));
            }
        }
    }
    let q = parse_sql(&sql).map_err(|e| malformed(format!("`{sql}`: {e}")))?;
    check_query(&q, t).map_err(|e| TemplateError::IllTyped { template: tpl.id.clone(), message: e.to_string() })?;
    Ok(q)
}
