//! Outcome logs as JSON lines, one [`PipelineOutcome`] per line.

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::strategy::{PipelineOutcome, OUTCOME_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("cannot read {log}")]
    Io { log: String, source: io::Error },
    #[error("{log} line {line}: schema version {found:?}, expected {expected}")]
    SchemaMismatch { log: String, line: usize, found: Option<u64>, expected: u32 },
    #[error("{log} line {line}: {message}")]
    Malformed { log: String, line: usize, message: String },
}

pub fn write_outcomes<'a>(
    mut out: impl Write,
    outcomes: impl IntoIterator<Item = &'a PipelineOutcome>,
) -> io::Result<()> {
    for o in outcomes {
        serde_json::to_writer(&mut out, o)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn parse_outcomes(reader: impl Read, log: &str) -> Result<Vec<PipelineOutcome>, LogError> {
    let mut outcomes = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| LogError::Io { log: log.to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| LogError::Malformed { log: log.to_string(), line: line_no, message };
        let value: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let found = value.get("schema_version").and_then(Value::as_u64);
        if found != Some(u64::from(OUTCOME_SCHEMA_VERSION)) {
            return Err(LogError::SchemaMismatch {
                log: log.to_string(),
                line: line_no,
                found,
                expected: OUTCOME_SCHEMA_VERSION,
            });
        }
        outcomes.push(serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?);
    }
    Ok(outcomes)
}

pub fn read_outcomes(path: impl AsRef<Path>) -> Result<Vec<PipelineOutcome>, LogError> {
    let path = path.as_ref();
    let log = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| LogError::Io { log: log.clone(), source })?;
    parse_outcomes(file, &log)
}
