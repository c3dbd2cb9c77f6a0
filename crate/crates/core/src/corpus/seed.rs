//! Reproducible randomness.
//!
//! Every example draws from its own ChaCha8 stream: the key is expanded from
//! the master seed, the stream id names the generator, and the block counter
//! starts at `example_index << 32` blocks. The stream for global example `j`
//! is therefore independent of how the corpus is split into shards, so
//! sharded and unsharded builds contain exactly the same examples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Words reserved per example (2^32 ChaCha blocks of 16 words).
const WORDS_PER_EXAMPLE_LOG2: u32 = 36;

/// Distinct ChaCha stream ids per generator, so the same master seed gives
/// unrelated draws for different corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Math = 1,
    Logic = 2,
    Sql = 3,
    Validate = 4,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedError {
    #[error("shard index {index} out of range for {count} shards")]
    ShardOutOfRange { index: u32, count: u32 },
    #[error("shard count must be positive")]
    ZeroShards,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    master_seed: u64,
    shard_index: u32,
    shard_count: u32,
}

impl SeedSpec {
    pub fn new(master_seed: u64, shard_index: u32, shard_count: u32) -> Result<Self, SeedError> {
        if shard_count == 0 {
            return Err(SeedError::ZeroShards);
        }
        if shard_index >= shard_count {
            return Err(SeedError::ShardOutOfRange { index: shard_index, count: shard_count });
        }
        Ok(SeedSpec { master_seed, shard_index, shard_count })
    }

    /// The whole corpus as one shard.
    pub fn single(master_seed: u64) -> Self {
        SeedSpec { master_seed, shard_index: 0, shard_count: 1 }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn shard_index(&self) -> u32 {
        self.shard_index
    }

    pub fn shard_count(&self) -> u32 {
        self.shard_count
    }

    /// Global example indices owned by this shard out of a corpus of `total`.
    pub fn indices(&self, total: u64) -> impl Iterator<Item = u64> {
        (self.shard_index as u64..total).step_by(self.shard_count as usize)
    }

    pub fn rng(&self, stream: RngStream, example_index: u64) -> ChaCha8Rng {
        assert!(example_index < 1 << 32, "example index {example_index} exceeds 2^32");
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(stream as u64);
        rng.set_word_pos((example_index as u128) << WORDS_PER_EXAMPLE_LOG2);
        rng
    }
}
