use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which generator produced an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Math,
    Logic,
    SqlGen,
    SqlSel,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Math => "math",
            Task::Logic => "logic",
            Task::SqlGen => "sql_gen",
            Task::SqlSel => "sql_sel",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-token selection tag: `I` inside a result value occurrence, `O` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    I,
    O,
}

/// One corpus record.
///
/// Field order here is the serialized field order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PretrainExample {
    pub id: String,
    pub task: Task,
    pub context: String,
    pub program: String,
    pub result: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<Tag>>,
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExampleError {
    #[error("example {id}: empty result")]
    EmptyResult { id: String },
    #[error("example {id}: tags must be present exactly for sql_sel examples")]
    TagPresence { id: String },
    #[error("example {id}: {tags} tags for {tokens} context tokens")]
    TagLength { id: String, tags: usize, tokens: usize },
    #[error("duplicate example id {id}")]
    DuplicateId { id: String },
}

impl ExampleError {
    pub fn id(&self) -> &str {
        match self {
            ExampleError::EmptyResult { id }
            | ExampleError::TagPresence { id }
            | ExampleError::TagLength { id, .. }
            | ExampleError::DuplicateId { id } => id,
        }
    }
}

/// Tokens are maximal runs of non-whitespace characters.
pub fn whitespace_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

impl PretrainExample {
    pub fn new(
        id: impl Into<String>,
        task: Task,
        context: impl Into<String>,
        program: impl Into<String>,
        result: impl Into<String>,
    ) -> Self {
        PretrainExample {
            id: id.into(),
            task,
            context: context.into(),
            program: program.into(),
            result: result.into(),
            tags: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn context_token_count(&self) -> usize {
        whitespace_tokens(&self.context).count()
    }

    /// Checks the per-record invariants.
    pub fn validate(&self) -> Result<(), ExampleError> {
        if self.result.is_empty() {
            return Err(ExampleError::EmptyResult { id: self.id.clone() });
        }
        match (&self.tags, self.task) {
            (Some(tags), Task::SqlSel) => {
                let tokens = self.context_token_count();
                if tags.len() != tokens {
                    return Err(ExampleError::TagLength {
                        id: self.id.clone(),
                        tags: tags.len(),
                        tokens,
                    });
                }
            }
            (None, Task::SqlSel) | (Some(_), _) => {
                return Err(ExampleError::TagPresence { id: self.id.clone() })
            }
            (None, _) => {}
        }
        Ok(())
    }
}

/// Validates every example and checks id uniqueness across the batch.
pub(crate) fn validate_batch(examples: &[PretrainExample]) -> Result<(), ExampleError> {
    let mut seen = HashSet::with_capacity(examples.len());
    for ex in examples {
        ex.validate()?;
        if !seen.insert(ex.id.as_str()) {
            return Err(ExampleError::DuplicateId { id: ex.id.clone() });
        }
    }
    Ok(())
}
