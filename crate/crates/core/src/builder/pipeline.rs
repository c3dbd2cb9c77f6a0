//! End-to-end SQL corpus construction.
//!
//! Each global example index owns one RNG stream and retries until it
//! produces an example: pick a table, flatten it (dropping rows if needed),
//! pick a shape and a template, instantiate against the *kept* rows, execute.
//! Executing against the truncated table keeps the result derivable from
//! the visible context.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::flatten::{flatten, parse_flattened, CellSpan, FlattenError, DEFAULT_BUDGET};
use super::template::{instantiate, QueryTemplate, Shape, TemplateError};
use crate::corpus::{PretrainExample, RngStream, SeedSpec, Tag, Task};
use crate::sql::table::parse_type_signature;
use crate::sql::{execute, parse_sql, render_result, render_sql, Cell, ExecError, ParseError, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("no tables to build from")]
    NoTables,
    #[error("no templates to build from")]
    NoTemplates,
    #[error("example {index}: no valid example after {attempts} attempts")]
    Exhausted { index: u64, attempts: u32 },
    #[error("template {template} produced an ill-typed query: {message}")]
    Internal { template: String, message: String },
    #[error("example {id}: {message}")]
    Example { id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SqlGenConfig {
    pub count: u64,
    pub budget: usize,
    pub max_attempts: u32,
}

impl SqlGenConfig {
    pub fn with_count(count: u64) -> Self {
        SqlGenConfig { count, budget: DEFAULT_BUDGET, max_attempts: 1000 }
    }
}

/// Generation counters; serialized as the `gen-sql` stats report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SqlBuildStats {
    pub emitted: u64,
    pub attempts: u64,
    pub discarded_empty_result: u64,
    pub discarded_no_compatible_columns: u64,
    pub discarded_budget: u64,
    pub truncated_tables: u64,
    pub dropped_rows: u64,
    pub shape_histogram: BTreeMap<String, u64>,
}

impl SqlBuildStats {
    pub fn merge(&mut self, other: &SqlBuildStats) {
        self.emitted += other.emitted;
        self.attempts += other.attempts;
        self.discarded_empty_result += other.discarded_empty_result;
        self.discarded_no_compatible_columns += other.discarded_no_compatible_columns;
        self.discarded_budget += other.discarded_budget;
        self.truncated_tables += other.truncated_tables;
        self.dropped_rows += other.dropped_rows;
        for (k, v) in &other.shape_histogram {
            *self.shape_histogram.entry(k.clone()).or_default() += v;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionStats {
    pub input: u64,
    pub retained: u64,
    pub retention_ratio: f64,
}

impl SelectionStats {
    pub fn merge(&mut self, other: &SelectionStats) {
        self.input += other.input;
        self.retained += other.retained;
        self.retention_ratio = if self.input == 0 { 0.0 } else { self.retained as f64 / self.input as f64 };
    }
}

fn by_shape(templates: &[QueryTemplate]) -> Vec<(Shape, Vec<&QueryTemplate>)> {
    let mut groups: BTreeMap<Shape, Vec<&QueryTemplate>> = BTreeMap::new();
    for t in templates {
        groups.entry(t.shape).or_default().push(t);
    }
    groups.into_iter().collect()
}

fn attempt<R: Rng>(
    rng: &mut R,
    tables: &[Table],
    shapes: &[(Shape, Vec<&QueryTemplate>)],
    budget: usize,
    stats: &mut SqlBuildStats,
) -> Result<Option<(PretrainExample, &'static str)>, BuildError> {
    let table = &tables[rng.gen_range(0..tables.len())];
    let flat = match flatten(table, budget, rng) {
        Ok(f) => f,
        Err(FlattenError::BudgetTooSmall { .. }) => {
            stats.discarded_budget += 1;
            return Ok(None);
        }
        Err(e) => unreachable!("flatten only fails on budget: {e}"),
    };
    let visible = table.select_rows(&flat.kept_rows);
    let (shape, group) = &shapes[rng.gen_range(0..shapes.len())];
    let tpl = group[rng.gen_range(0..group.len())];
    let query = match instantiate(tpl, &visible, rng) {
        Ok(q) => q,
        Err(TemplateError::NoCompatibleColumns { .. } | TemplateError::IllTyped { .. }) => {
            stats.discarded_no_compatible_columns += 1;
            return Ok(None);
        }
        Err(e) => return Err(BuildError::Internal { template: tpl.id.clone(), message: e.to_string() }),
    };
    let result = match execute(&query, &visible) {
        Ok(r) => r,
        Err(ExecError::EmptyResult) => {
            stats.discarded_empty_result += 1;
            return Ok(None);
        }
        Err(e) => return Err(BuildError::Internal { template: tpl.id.clone(), message: e.to_string() }),
    };
    let truncated = flat.dropped_rows > 0;
    if truncated {
        stats.truncated_tables += 1;
        stats.dropped_rows += flat.dropped_rows as u64;
    }
    let ex = PretrainExample::new(String::new(), Task::SqlGen, flat.text, render_sql(&query), render_result(&result))
        .with_meta("template", &tpl.id)
        .with_meta("shape", shape.as_str())
        .with_meta("table", table.name())
        .with_meta("column_types", visible.type_signature())
        .with_meta("truncated", truncated)
        .with_meta("dropped_rows", flat.dropped_rows)
        .with_meta("budget", budget);
    Ok(Some((ex, shape.as_str())))
}

pub fn build_sql_gen(
    tables: &[Table],
    templates: &[QueryTemplate],
    cfg: &SqlGenConfig,
    seed: &SeedSpec,
) -> Result<(Vec<PretrainExample>, SqlBuildStats), BuildError> {
    if tables.is_empty() {
        return Err(BuildError::NoTables);
    }
    if templates.is_empty() {
        return Err(BuildError::NoTemplates);
    }
    let shapes = by_shape(templates);
    let mut stats = SqlBuildStats::default();
    let mut out = Vec::new();
    for index in seed.indices(cfg.count) {
        let mut rng = seed.rng(RngStream::Sql, index);
        let mut made = None;
        for _ in 0..cfg.max_attempts {
            stats.attempts += 1;
            if let Some(found) = attempt(&mut rng, tables, &shapes, cfg.budget, &mut stats)? {
                made = Some(found);
                break;
            }
        }
        let (mut ex, shape) = made.ok_or(BuildError::Exhausted { index, attempts: cfg.max_attempts })?;
        ex.id = format!("sql_gen-{}-{index}", seed.master_seed());
        ex.meta.insert("seed".into(), seed.master_seed().to_string());
        *stats.shape_histogram.entry(shape.to_string()).or_default() += 1;
        stats.emitted += 1;
        out.push(ex);
    }
    Ok((out, stats))
}

/// Rebuilds the visible table of a SQL example from its flattened context
/// and the `column_types` / `table` meta entries.
pub fn reconstruct(ex: &PretrainExample) -> Result<(Table, Vec<CellSpan>), String> {
    let sig = ex.meta.get("column_types").ok_or("missing column_types meta")?;
    let types = parse_type_signature(sig).ok_or_else(|| format!("bad column_types `{sig}`"))?;
    let name = ex.meta.get("table").map(String::as_str).unwrap_or("table");
    parse_flattened(&ex.context, name, &types).map_err(|e| e.to_string())
}

/// Per-token IO tags over a flattened context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagAlignment {
    pub tags: Vec<Tag>,
}

/// Tags every cell occurrence whose rendering equals a result value. `None`
/// when some value has no occurrence.
pub fn align_tags(token_count: usize, spans: &[CellSpan], table: &Table, values: &[Cell]) -> Option<TagAlignment> {
    let mut tags = vec![Tag::O; token_count];
    let wanted: HashSet<String> = values.iter().map(Cell::render).collect();
    let mut found: HashSet<&str> = HashSet::new();
    for span in spans.iter().filter(|s| s.token_end > s.token_start) {
        let rendered = table.rows()[span.row][span.col].render();
        if let Some(v) = wanted.get(&rendered) {
            found.insert(v.as_str());
            tags[span.token_start..span.token_end].fill(Tag::I);
        }
    }
    (found.len() == wanted.len()).then_some(TagAlignment { tags })
}

/// Re-executes a SQL example against its own context.
pub fn rerun(ex: &PretrainExample) -> Result<(Table, Vec<CellSpan>, crate::sql::QueryResult), String> {
    let (table, spans) = reconstruct(ex)?;
    let query = parse_sql(&ex.program).map_err(|e: ParseError| e.to_string())?;
    let result = execute(&query, &table).map_err(|e| e.to_string())?;
    Ok((table, spans, result))
}

/// Keeps the generation examples whose every result value occurs as a cell
/// of the context, attaching IO tags.
pub fn build_sql_sel(gen_examples: &[PretrainExample]) -> Result<(Vec<PretrainExample>, SelectionStats), BuildError> {
    let mut out = Vec::new();
    let mut stats = SelectionStats::default();
    for ex in gen_examples {
        if ex.task != Task::SqlGen {
            return Err(BuildError::Example { id: ex.id.clone(), message: format!("expected sql_gen, got {}", ex.task) });
        }
        stats.input += 1;
        let (table, spans, result) =
            rerun(ex).map_err(|message| BuildError::Example { id: ex.id.clone(), message })?;
        let Some(alignment) = align_tags(ex.context_token_count(), &spans, &table, result.values()) else {
            continue;
        };
        let mut sel = ex.clone();
        sel.id = match ex.id.strip_prefix("sql_gen-") {
            Some(rest) => format!("sql_sel-{rest}"),
            None => format!("sql_sel-{}", ex.id),
        };
        sel.task = Task::SqlSel;
        sel.tags = Some(alignment.tags);
        out.push(sel);
        stats.retained += 1;
    }
    stats.retention_ratio = if stats.input == 0 { 0.0 } else { stats.retained as f64 / stats.input as f64 };
    Ok((out, stats))
}
