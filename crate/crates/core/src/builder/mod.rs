//! The SQL corpus pipeline: table ingestion, budgeted flattening, template
//! instantiation, execution, selection filtering and keyword obfuscation.

pub mod flatten;
pub mod ingest;
pub mod obfuscate;
pub mod pipeline;
pub mod template;

pub use flatten::{flatten, parse_flattened, CellSpan, FlattenError, FlattenedDb, DEFAULT_BUDGET};
pub use ingest::{ingest_wikisql, normalize_header, read_table_file, table_from_json, IngestError};
pub use obfuscate::{deobfuscate_keywords, obfuscate_keywords, KeywordMap, ObfuscateError};
pub use pipeline::{
    align_tags, build_sql_gen, build_sql_sel, reconstruct, BuildError, SelectionStats, SqlBuildStats, SqlGenConfig,
    TagAlignment,
};
pub use template::{default_templates, instantiate, load_templates, QueryTemplate, Shape, SlotSpec, SlotType, TemplateError};
