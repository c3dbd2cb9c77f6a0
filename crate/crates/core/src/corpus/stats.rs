use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::example::{whitespace_tokens, PretrainExample, Task};
use super::shard::{ShardError, ShardReader};

/// Summary counts over a shard.
///
/// The label of an example is its result for logic, its operator count
/// (`ops=1`, `ops=2`) for math, and its template shape for SQL tasks, so
/// `label_histogram` always sums to `example_count`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub example_count: u64,
    pub task_histogram: BTreeMap<Task, u64>,
    pub label_histogram: BTreeMap<String, u64>,
    /// Program length in whitespace tokens.
    pub program_length_histogram: BTreeMap<usize, u64>,
    pub truncated_db_count: u64,
}

impl CorpusStats {
    /// Fraction of examples carrying `label`, or 0 for an empty corpus.
    pub fn label_fraction(&self, label: &str) -> f64 {
        if self.example_count == 0 {
            return 0.0;
        }
        *self.label_histogram.get(label).unwrap_or(&0) as f64 / self.example_count as f64
    }
}

pub fn example_label(ex: &PretrainExample) -> String {
    match ex.task {
        Task::Logic => ex.result.clone(),
        Task::Math => {
            let ops = whitespace_tokens(&ex.program).filter(|t| *t == "+" || *t == "-").count();
            format!("ops={ops}")
        }
        Task::SqlGen | Task::SqlSel => ex.meta.get("shape").cloned().unwrap_or_else(|| "unknown".into()),
    }
}

#[derive(Debug, Default)]
pub struct StatsAccumulator {
    stats: CorpusStats,
}

impl StatsAccumulator {
    pub fn add(&mut self, ex: &PretrainExample) {
        let s = &mut self.stats;
        s.example_count += 1;
        *s.task_histogram.entry(ex.task).or_default() += 1;
        *s.label_histogram.entry(example_label(ex)).or_default() += 1;
        *s.program_length_histogram.entry(whitespace_tokens(&ex.program).count()).or_default() += 1;
        if ex.meta.get("truncated").map(String::as_str) == Some("true") {
            s.truncated_db_count += 1;
        }
    }

    pub fn finish(self) -> CorpusStats {
        self.stats
    }
}

impl<'a> FromIterator<&'a PretrainExample> for CorpusStats {
    fn from_iter<I: IntoIterator<Item = &'a PretrainExample>>(iter: I) -> Self {
        let mut acc = StatsAccumulator::default();
        iter.into_iter().for_each(|ex| acc.add(ex));
        acc.finish()
    }
}

/// One pass over a shard file.
pub fn collect_stats(shard: &Path) -> Result<CorpusStats, ShardError> {
    let mut acc = StatsAccumulator::default();
    for item in ShardReader::open(shard)? {
        let (_, ex) = item?;
        acc.add(&ex);
    }
    Ok(acc.finish())
}
