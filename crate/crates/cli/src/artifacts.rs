//! Run outputs: outcome logs, compressed transcripts and atomic writes.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::Context;
use desksim::agency::AgentCall;
use desksim::outcome_log::write_outcomes;
use desksim::PipelineOutcome;
use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const OUTCOMES_FILE: &str = "outcomes.jsonl";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl.gz";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Returns the SHA-256 of the bytes written.
pub fn write_outcome_log(path: &Path, outcomes: &[PipelineOutcome]) -> anyhow::Result<String> {
    let mut bytes = Vec::new();
    write_outcomes(&mut bytes, outcomes)?;
    write_atomic(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: u64,
    #[serde(flatten)]
    pub call: AgentCall,
}

/// Gzip-compressed JSON lines with a zeroed header timestamp. Returns the
/// SHA-256 of the compressed bytes.
pub fn write_transcripts<'a>(
    path: &Path,
    records: impl IntoIterator<Item = (u64, &'a AgentCall)>,
) -> anyhow::Result<String> {
    let mut gz = GzBuilder::new().mtime(0).write(Vec::new(), Compression::default());
    #[derive(Serialize)]
    struct Line<'b> {
        id: u64,
        #[serde(flatten)]
        call: &'b AgentCall,
    }
    for (id, call) in records {
        serde_json::to_writer(&mut gz, &Line { id, call })?;
        gz.write_all(b"\n")?;
    }
    let bytes = gz.finish()?;
    write_atomic(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

pub fn read_transcripts(path: &Path) -> anyhow::Result<Vec<TranscriptRecord>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for line in BufReader::new(GzDecoder::new(file)).lines() {
        let line = line?;
        if !line.is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use desksim::domain::BackendId;
    use desksim::prompts::Role;

    #[test]
    fn transcripts_round_trip_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let call = AgentCall {
            article_id: "a".into(),
            role: Role::Analyst,
            backend: BackendId::new("m"),
            cache_key: None,
            cache_hit: false,
            prompt: "p".into(),
            raw: Some("r".into()),
            parsed: None,
            error: None,
        };
        let p1 = dir.path().join("t1.gz");
        let p2 = dir.path().join("t2.gz");
        let d1 = write_transcripts(&p1, [(7, &call)]).unwrap();
        let d2 = write_transcripts(&p2, [(7, &call)]).unwrap();
        assert_eq!(d1, d2);
        let back = read_transcripts(&p1).unwrap();
        assert_eq!(back, vec![TranscriptRecord { id: 7, call }]);
    }
}
