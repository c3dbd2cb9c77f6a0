//! Shard validation: schema invariants on every line, plus re-execution of a
//! sampled fraction of examples against their own contexts.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::builder::pipeline::{align_tags, rerun};
use crate::builder::{deobfuscate_keywords, KeywordMap};
use crate::corpus::{ExampleError, PretrainExample, RngStream, SeedSpec, ShardError, ShardReader, Task};
use crate::logic::{entailed, parse_premises, render_label, ImplicationStmt};
use crate::math::{eval_math, parse_bindings, MathContext, MathExpr};
use crate::sql::render_result;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Shard(#[from] ShardError),
    #[error(transparent)]
    Invalid(#[from] ExampleError),
    #[error("example {id}: {message}")]
    Mismatch { id: String, message: String },
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub sample_fraction: f64,
    pub seed: u64,
    pub keyword_map: KeywordMap,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { sample_fraction: 0.1, seed: 0, keyword_map: KeywordMap::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub examples: u64,
    pub reexecuted: u64,
    pub reexecuted_by_task: BTreeMap<Task, u64>,
}

/// Re-runs the example's program against its context and compares with the
/// stored result (and tags, for selection examples).
pub fn check_example(ex: &PretrainExample, keyword_map: &KeywordMap) -> Result<(), String> {
    let expected = match ex.task {
        Task::Math => {
            let expr: MathExpr = ex.program.parse().map_err(|e| format!("program: {e}"))?;
            let bindings = parse_bindings(&ex.context).map_err(|e| format!("context: {e}"))?;
            let ctx = MathContext::new(bindings, &expr).map_err(|e| format!("context: {e}"))?;
            eval_math(&expr, &ctx).map_err(|e| e.to_string())?.to_string()
        }
        Task::Logic => {
            let premises = parse_premises(&ex.context).map_err(|e| format!("context: {e}"))?;
            let conclusion: ImplicationStmt = ex.program.parse().map_err(|e| format!("program: {e}"))?;
            render_label(entailed(&premises, &conclusion)).to_string()
        }
        Task::SqlGen | Task::SqlSel => {
            let mut plain = ex.clone();
            if ex.meta.get("obfuscated").map(String::as_str) == Some("true") {
                plain.program = deobfuscate_keywords(&ex.program, keyword_map);
            }
            if let Some(budget) = ex.meta.get("budget") {
                let budget: usize = budget.parse().map_err(|_| format!("bad budget meta `{budget}`"))?;
                if ex.context_token_count() > budget {
                    return Err(format!("context has {} tokens, budget {budget}", ex.context_token_count()));
                }
            }
            let (table, spans, result) = rerun(&plain)?;
            if ex.task == Task::SqlSel {
                let alignment = align_tags(ex.context_token_count(), &spans, &table, result.values())
                    .ok_or("result value missing from context")?;
                if Some(&alignment.tags) != ex.tags.as_ref() {
                    return Err("stored tags differ from recomputed alignment".into());
                }
            }
            render_result(&result)
        }
    };
    if expected != ex.result {
        return Err(format!("stored result `{}`, re-executed `{expected}`", ex.result));
    }
    Ok(())
}

pub fn validate_shard(path: &Path, opts: &ValidateOptions) -> Result<ValidationReport, ValidationError> {
    let mut rng = SeedSpec::single(opts.seed).rng(RngStream::Validate, 0);
    let fraction = opts.sample_fraction.clamp(0.0, 1.0);
    let mut ids = HashSet::new();
    let mut report = ValidationReport::default();
    for item in ShardReader::open(path)? {
        let (_, ex) = item?;
        ex.validate()?;
        if !ids.insert(ex.id.clone()) {
            return Err(ExampleError::DuplicateId { id: ex.id }.into());
        }
        report.examples += 1;
        if rng.gen_bool(fraction) {
            check_example(&ex, &opts.keyword_map).map_err(|message| ValidationError::Mismatch { id: ex.id.clone(), message })?;
            report.reexecuted += 1;
            *report.reexecuted_by_task.entry(ex.task).or_default() += 1;
        }
    }
    Ok(report)
}
