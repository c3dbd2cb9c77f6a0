//! Deterministic synthesis of program-execution pre-training corpora.
//!
//! Three generators pair a seeded program/context sampler with a reference
//! executor whose output becomes the supervision target:
//!
//! * [`math`]: addition/subtraction expressions over named decimal variables,
//!   evaluated exactly in integer tenths.
//! * [`logic`]: implication premises over five boolean variables, labelled by
//!   exhaustive truth-table entailment.
//! * [`sql`] + [`builder`]: a small SQL subset executed over WikiSQL-style
//!   tables, flattened under a token budget, with an IO-tagged selection
//!   variant.
//!
//! Every corpus record is a [`PretrainExample`] written as one JSON line by
//! [`corpus::emit_shard`].

pub mod builder;
pub mod cli;
pub mod corpus;
pub mod logic;
pub mod math;
pub mod sql;
pub mod validate;

pub use corpus::{CorpusStats, PretrainExample, SeedSpec, Tag, Task};
