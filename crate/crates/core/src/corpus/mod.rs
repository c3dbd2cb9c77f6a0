//! Shared corpus plumbing: the example record, seeding, shard IO and stats.

mod example;
mod seed;
mod shard;
mod stats;

pub use example::{whitespace_tokens, ExampleError, PretrainExample, Tag, Task};
pub use seed::{SeedSpec, SeedError, RngStream};
pub use shard::{emit_shard, read_shard, write_shard, ShardError, ShardReader};
pub use stats::{collect_stats, CorpusStats, StatsAccumulator};
