//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (bad input file,
//! validation failure, query error), 3 internal invariant violation (a
//! generator produced an invalid example).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::builder::{
    build_sql_gen, build_sql_sel, default_templates, ingest_wikisql, load_templates, obfuscate_keywords,
    read_table_file, KeywordMap, QueryTemplate, SelectionStats, SqlBuildStats, SqlGenConfig, DEFAULT_BUDGET,
};
use crate::corpus::{collect_stats, emit_shard, PretrainExample, SeedSpec, ShardError};
use crate::logic::{gen_logic, LogicConfig};
use crate::math::{gen_math, MathConfig};
use crate::sql::{execute, parse_sql, render_result, Table};
use crate::validate::{validate_shard, ValidateOptions, ValidationError};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

/// Emission failures: IO is a data problem, an invalid example is ours.
fn emit_error(e: ShardError) -> CliError {
    match e {
        ShardError::Invalid(e) => CliError::Internal(format!("generator produced invalid example: {e}")),
        other => data(other),
    }
}

#[derive(Debug, Parser)]
#[command(name = "poet-forge", version, about = "Synthesize program-execution pre-training corpora")]
#[command(args_override_self = true)]
struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    count: u64,
    /// Master seed.
    #[arg(long, env = "POET_FORGE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Number of output shards; shard files get a `-NNNNN-of-NNNNN` suffix.
    #[arg(long, default_value_t = 1)]
    shards: u32,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Arithmetic expressions over decimal variables.
    GenMath {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        irrelevant_vars: usize,
    },
    /// Implication entailment instances.
    GenLogic {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = LogicConfig::DEFAULT_MIN_PAIRS)]
        min_pairs: usize,
        #[arg(long, default_value_t = LogicConfig::DEFAULT_MAX_PAIRS)]
        max_pairs: usize,
    },
    /// SQL execution examples over WikiSQL-format tables.
    GenSql {
        #[command(flatten)]
        gen: GenArgs,
        /// WikiSQL tables JSONL.
        #[arg(long, value_name = "FILE")]
        tables: PathBuf,
        /// JSON array of query templates (defaults to the bundled set).
        #[arg(long, value_name = "FILE")]
        templates: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 1000)]
        max_attempts: u32,
        /// Also write the result-selection corpus here.
        #[arg(long, value_name = "PATH")]
        sel_out: Option<PathBuf>,
        /// Replace SQL keywords in programs with rare tokens.
        #[arg(long)]
        obfuscate: bool,
        /// JSON object keyword -> replacement token.
        #[arg(long, value_name = "FILE")]
        keyword_map: Option<PathBuf>,
        /// Write generation/selection counters as JSON.
        #[arg(long, value_name = "PATH")]
        stats_out: Option<PathBuf>,
    },
    /// Execute one query against one table and print the result.
    ExecSql {
        #[arg(long)]
        query: String,
        /// A single WikiSQL table object.
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Check shard invariants and re-execute a sample of examples.
    Validate {
        #[arg(required = true)]
        shards: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        sample_fraction: f64,
        #[arg(long, env = "POET_FORGE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        keyword_map: Option<PathBuf>,
    },
    /// Print corpus statistics as JSON.
    Stats { shard: PathBuf },
}

pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I: IntoIterator<Item = String>>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv: Vec<String> = argv.into_iter().collect();
    let result = parse_args(&argv, out).and_then(|cli| match cli {
        Some(cli) => dispatch(cli, out, err),
        None => Ok(()),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let report = json!({ "error": e.kind(), "code": e.exit_code(), "message": e.message() });
            let _ = writeln!(err, "{report}");
            e.exit_code()
        }
    }
}

/// Finds `--config` by hand: required flags may only be satisfied by the
/// config file, so clap cannot parse the raw argv first.
fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn clap_parse(argv: &[String], out: &mut dyn Write) -> Result<Option<Cli>, CliError> {
    match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            Ok(None)
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

/// `Ok(None)` when clap handled the invocation itself (help, version).
fn parse_args(argv: &[String], out: &mut dyn Write) -> Result<Option<Cli>, CliError> {
    let Some(config) = config_path(argv) else {
        return clap_parse(argv, out);
    };
    let text = std::fs::read_to_string(&config).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let values: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let mut injected = Vec::new();
    for (key, value) in values {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            serde_json::Value::Bool(true) => injected.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => injected.extend([flag, s]),
            serde_json::Value::Number(n) => injected.extend([flag, n.to_string()]),
            other => return Err(CliError::Usage(format!("config key `{key}`: unsupported value {other}"))),
        }
    }
    // Config values go right after the subcommand, so later command-line
    // occurrences override them.
    let Some(sub) = argv
        .iter()
        .position(|a| matches!(a.as_str(), "gen-math" | "gen-logic" | "gen-sql" | "exec-sql" | "validate" | "stats"))
    else {
        return clap_parse(argv, out);
    };
    let mut merged = argv[..=sub].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&argv[sub + 1..]);
    clap_parse(&merged, out)
}

/// `out.jsonl` for a single shard, else `out-00002-of-00008.jsonl`.
pub fn shard_path(base: &Path, index: u32, count: u32) -> PathBuf {
    if count == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{index:05}-of-{count:05}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{index:05}-of-{count:05}"),
    };
    base.with_file_name(name)
}

fn check_gen(gen: &GenArgs) -> Result<(), CliError> {
    if gen.shards == 0 {
        return Err(CliError::Usage("--shards must be positive".into()));
    }
    if gen.jobs == 0 {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    if gen.count >= 1 << 32 {
        return Err(CliError::Usage("--count must be below 2^32".into()));
    }
    Ok(())
}

/// Runs `work` once per shard on `jobs` threads, writing one log line per
/// shard. Results come back in shard order.
fn fan_out<T, F>(gen: &GenArgs, err: &mut dyn Write, work: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(SeedSpec, PathBuf) -> Result<(usize, T), CliError> + Sync,
{
    check_gen(gen)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(gen.jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<Result<(usize, T), CliError>> = pool.install(|| {
        (0..gen.shards)
            .into_par_iter()
            .map(|i| {
                let seed = SeedSpec::new(gen.seed, i, gen.shards).map_err(|e| CliError::Usage(e.to_string()))?;
                work(seed, shard_path(&gen.out, i, gen.shards))
            })
            .collect()
    });
    let mut out = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        let (written, value) = r?;
        let _ = writeln!(err, "shard {}/{}: {written} examples -> {}", i + 1, gen.shards, shard_path(&gen.out, i as u32, gen.shards).display());
        out.push(value);
    }
    Ok(out)
}

fn load_keyword_map(path: Option<&Path>) -> Result<KeywordMap, CliError> {
    let Some(path) = path else {
        return Ok(KeywordMap::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let map: BTreeMap<String, String> = serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))?;
    KeywordMap::total(map).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn obfuscate_all(examples: &mut [PretrainExample], map: &KeywordMap) {
    for ex in examples {
        ex.program = obfuscate_keywords(&ex.program, map);
        ex.meta.insert("obfuscated".into(), "true".into());
    }
}

struct SqlJob<'a> {
    tables: &'a [Table],
    templates: &'a [QueryTemplate],
    cfg: SqlGenConfig,
    sel_out: Option<&'a Path>,
    keyword_map: Option<&'a KeywordMap>,
    shards: u32,
}

impl SqlJob<'_> {
    fn run(&self, seed: SeedSpec, path: PathBuf) -> Result<(usize, (SqlBuildStats, SelectionStats)), CliError> {
        let (mut gen, stats) = build_sql_gen(self.tables, self.templates, &self.cfg, &seed).map_err(data)?;
        let mut sel_stats = SelectionStats::default();
        if let Some(sel_out) = self.sel_out {
            let (mut sel, s) = build_sql_sel(&gen).map_err(|e| CliError::Internal(e.to_string()))?;
            sel_stats = s;
            if let Some(map) = self.keyword_map {
                obfuscate_all(&mut sel, map);
            }
            emit_shard(&sel, &shard_path(sel_out, seed.shard_index(), self.shards)).map_err(emit_error)?;
        }
        if let Some(map) = self.keyword_map {
            obfuscate_all(&mut gen, map);
        }
        let n = emit_shard(&gen, &path).map_err(emit_error)?;
        Ok((n, (stats, sel_stats)))
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::GenMath { gen, irrelevant_vars } => {
            let cfg = MathConfig { irrelevant_vars, count: gen.count };
            gen_math(&SeedSpec::single(gen.seed), &MathConfig { count: 0, ..cfg }).map_err(|e| CliError::Usage(e.to_string()))?;
            fan_out(&gen, err, |seed, path| {
                let exs = gen_math(&seed, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok((emit_shard(&exs, &path).map_err(emit_error)?, ()))
            })?;
        }
        Command::GenLogic { gen, min_pairs, max_pairs } => {
            let cfg = LogicConfig { count: gen.count, min_pairs, max_pairs };
            gen_logic(&SeedSpec::single(gen.seed), &LogicConfig { count: 0, ..cfg }).map_err(|e| CliError::Usage(e.to_string()))?;
            fan_out(&gen, err, |seed, path| {
                let exs = gen_logic(&seed, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok((emit_shard(&exs, &path).map_err(emit_error)?, ()))
            })?;
        }
        Command::GenSql { gen, tables, templates, budget, max_attempts, sel_out, obfuscate, keyword_map, stats_out } => {
            let tables = ingest_wikisql(&tables).map_err(data)?;
            let templates = match templates {
                Some(p) => load_templates(&p).map_err(data)?,
                None => default_templates(),
            };
            let map = if obfuscate || keyword_map.is_some() { Some(load_keyword_map(keyword_map.as_deref())?) } else { None };
            let job = SqlJob {
                tables: &tables,
                templates: &templates,
                cfg: SqlGenConfig { count: gen.count, budget, max_attempts },
                sel_out: sel_out.as_deref(),
                keyword_map: map.as_ref(),
                shards: gen.shards,
            };
            let per_shard = fan_out(&gen, err, |seed, path| job.run(seed, path))?;
            let mut build = SqlBuildStats::default();
            let mut selection = SelectionStats::default();
            for (b, s) in &per_shard {
                build.merge(b);
                selection.merge(s);
            }
            if let Some(path) = stats_out {
                let report = json!({ "generation": build, "selection": selection });
                let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
                std::fs::write(&path, text + "\n").map_err(|e| data(format!("{}: {e}", path.display())))?;
            }
        }
        Command::ExecSql { query, table } => {
            let table = read_table_file(&table).map_err(data)?;
            let q = parse_sql(&query).map_err(data)?;
            let result = execute(&q, &table).map_err(data)?;
            writeln!(out, "{}", render_result(&result)).map_err(data)?;
        }
        Command::Validate { shards, sample_fraction, seed, keyword_map } => {
            if !(0.0..=1.0).contains(&sample_fraction) {
                return Err(CliError::Usage("--sample-fraction must be within [0, 1]".into()));
            }
            let opts = ValidateOptions { sample_fraction, seed, keyword_map: load_keyword_map(keyword_map.as_deref())? };
            for shard in &shards {
                let report = validate_shard(shard, &opts).map_err(|e| match e {
                    ValidationError::Shard(ShardError::Io { .. }) => data(e),
                    other => data(format!("{}: {other}", shard.display())),
                })?;
                let _ = writeln!(
                    err,
                    "{}: ok, {} examples, {} re-executed",
                    shard.display(),
                    report.examples,
                    report.reexecuted
                );
            }
        }
        Command::Stats { shard } => {
            let stats = collect_stats(&shard).map_err(data)?;
            let text = serde_json::to_string_pretty(&stats).map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(out, "{text}").map_err(data)?;
        }
    }
    Ok(())
}
