use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::example::{validate_batch, ExampleError, PretrainExample};

#[derive(Debug, Error)]
pub enum ShardError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Invalid(#[from] ExampleError),
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
}

/// Writes one JSON object per line, in input order. Nothing is written if
/// any example fails validation.
pub fn write_shard<W: Write>(examples: &[PretrainExample], out: W) -> Result<usize, io::Error> {
    let mut out = BufWriter::new(out);
    for ex in examples {
        serde_json::to_writer(&mut out, ex)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(examples.len())
}

pub fn emit_shard(examples: &[PretrainExample], path: &Path) -> Result<usize, ShardError> {
    validate_batch(examples)?;
    let io_err = |source| ShardError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    write_shard(examples, file).map_err(io_err)
}

/// Streaming reader over a shard; yields `(line_number, example)`.
pub struct ShardReader {
    path: PathBuf,
    lines: io::Lines<BufReader<File>>,
    line: usize,
}

impl ShardReader {
    pub fn open(path: &Path) -> Result<Self, ShardError> {
        let file = File::open(path).map_err(|source| ShardError::Io { path: path.to_path_buf(), source })?;
        Ok(ShardReader { path: path.to_path_buf(), lines: BufReader::new(file).lines(), line: 0 })
    }
}

impl Iterator for ShardReader {
    type Item = Result<(usize, PretrainExample), ShardError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(source) => return Some(Err(ShardError::Io { path: self.path.clone(), source })),
            };
            self.line += 1;
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str(&line)
                    .map(|ex| (self.line, ex))
                    .map_err(|e| ShardError::Malformed {
                        path: self.path.clone(),
                        line: self.line,
                        message: e.to_string(),
                    }),
            );
        }
    }
}

pub fn read_shard(path: &Path) -> Result<Vec<PretrainExample>, ShardError> {
    ShardReader::open(path)?.map(|r| r.map(|(_, ex)| ex)).collect()
}
