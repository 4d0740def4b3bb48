//! Content-addressed response store.
//!
//! On disk the store is a directory holding one blob per key under `blobs/`
//! plus an append-only `index.jsonl` describing each request. Blobs are the
//! model's raw text, byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CompletionRequest;

/// SHA-256 over backend name, prompt bytes and sampling parameters, optionally
/// scoped by a backend fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn for_request(req: &CompletionRequest) -> Self {
        let mut hasher = Sha256::new();
        // length-prefixed fields so no two field splits collide
        for field in [req.backend.as_str().as_bytes(), req.prompt.as_bytes()] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field);
        }
        hasher.update(req.sampling.temperature.to_bits().to_le_bytes());
        hasher.update(req.sampling.max_output.to_le_bytes());
        Self(hex::encode(hasher.finalize()))
    }

    /// Key under which a response from a backend with this fingerprint is
    /// stored. An empty fingerprint leaves the key unchanged.
    pub fn scoped(&self, fingerprint: &str) -> Self {
        if fingerprint.is_empty() {
            return self.clone();
        }
        let mut hasher = Sha256::new();
        for field in [self.0.as_bytes(), fingerprint.as_bytes()] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field);
        }
        Self(hex::encode(hasher.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One line of the human-readable sidecar index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub key: CacheKey,
    pub backend: String,
    pub temperature: f64,
    pub max_output: u32,
    pub prompt_bytes: usize,
    pub prompt_head: String,
    pub response_bytes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl IndexEntry {
    pub fn describe(key: &CacheKey, req: &CompletionRequest, text: &str, model: Option<String>) -> Self {
        Self {
            key: key.clone(),
            backend: req.backend.to_string(),
            temperature: req.sampling.temperature,
            max_output: req.sampling.max_output,
            prompt_bytes: req.prompt.len(),
            prompt_head: req.prompt.chars().take(80).collect(),
            response_bytes: text.len(),
            model,
        }
    }
}

pub trait ResponseStore: Send + Sync {
    fn get(&self, key: &CacheKey) -> io::Result<Option<Arc<str>>>;

    /// Inserts unless the key is already present; returns the stored text,
    /// which is the earlier value when another writer got there first.
    fn put(&self, entry: IndexEntry, text: &str) -> io::Result<Arc<str>>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Default)]
pub struct MemoryCache {
    entries: RwLock<HashMap<CacheKey, Arc<str>>>,
}

impl MemoryCache {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ResponseStore for MemoryCache {
    fn get(&self, key: &CacheKey) -> io::Result<Option<Arc<str>>> {
        Ok(self.entries.read().expect("cache lock").get(key).cloned())
    }

    fn put(&self, entry: IndexEntry, text: &str) -> io::Result<Arc<str>> {
        let mut map = self.entries.write().expect("cache lock");
        Ok(map.entry(entry.key).or_insert_with(|| Arc::from(text)).clone())
    }

    fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }
}

pub struct DiskCache {
    root: PathBuf,
    loaded: RwLock<HashMap<CacheKey, Arc<str>>>,
    index: Mutex<fs::File>,
}

impl DiskCache {
    pub const INDEX_FILE: &'static str = "index.jsonl";
    const BLOB_DIR: &'static str = "blobs";

    pub fn open(root: impl AsRef<Path>) -> io::Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join(Self::BLOB_DIR))?;
        let index = OpenOptions::new().create(true).append(true).open(root.join(Self::INDEX_FILE))?;
        Ok(Self { root, loaded: RwLock::default(), index: Mutex::new(index) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn blob_path(&self, key: &CacheKey) -> PathBuf {
        self.root.join(Self::BLOB_DIR).join(format!("{key}.txt"))
    }

    fn read_blob(&self, key: &CacheKey) -> io::Result<Option<Arc<str>>> {
        match fs::read(self.blob_path(key)) {
            Ok(bytes) => {
                let text = String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                Ok(Some(Arc::from(text)))
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn read_index(&self) -> io::Result<Vec<IndexEntry>> {
        let raw = fs::read_to_string(self.root.join(Self::INDEX_FILE))?;
        raw.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)))
            .collect()
    }
}

impl ResponseStore for DiskCache {
    fn get(&self, key: &CacheKey) -> io::Result<Option<Arc<str>>> {
        if let Some(hit) = self.loaded.read().expect("cache lock").get(key) {
            return Ok(Some(hit.clone()));
        }
        let blob = self.read_blob(key)?;
        if let Some(text) = &blob {
            self.loaded.write().expect("cache lock").insert(key.clone(), text.clone());
        }
        Ok(blob)
    }

    fn put(&self, entry: IndexEntry, text: &str) -> io::Result<Arc<str>> {
        let key = entry.key.clone();
        let final_path = self.blob_path(&key);
        let mut tmp = tempfile::NamedTempFile::new_in(self.root.join(Self::BLOB_DIR))?;
        tmp.write_all(text.as_bytes())?;
        tmp.as_file().sync_all()?;
        match tmp.persist_noclobber(&final_path) {
            Ok(_) => {
                let mut line =
                    serde_json::to_string(&entry).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                line.push('\n');
                self.index.lock().expect("index lock").write_all(line.as_bytes())?;
                let stored: Arc<str> = Arc::from(text);
                self.loaded.write().expect("cache lock").insert(key, stored.clone());
                Ok(stored)
            }
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => {
                self.get(&key)?.ok_or_else(|| io::Error::other(format!("blob {key} vanished")))
            }
            Err(e) => Err(e.error),
        }
    }

    fn len(&self) -> usize {
        fs::read_dir(self.root.join(Self::BLOB_DIR))
            .map(|rd| rd.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "txt")).count())
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BackendId;
    use crate::gateway::Sampling;

    fn req(prompt: &str) -> CompletionRequest {
        CompletionRequest::new(BackendId::new("scripted"), prompt)
    }

    #[test]
    fn key_is_stable_and_sensitive() {
        let a = CacheKey::for_request(&req("the junior trader"));
        assert_eq!(a, CacheKey::for_request(&req("the junior trader")));
        assert_ne!(a, CacheKey::for_request(&req("the senior trader")));
        assert_eq!(a.as_str().len(), 64);

        let mut hotter = req("the junior trader");
        hotter.sampling = Sampling { temperature: 0.7, ..hotter.sampling };
        assert_ne!(a, CacheKey::for_request(&hotter));

        let other_backend = CompletionRequest::new(BackendId::new("scripted2"), "the junior trader");
        assert_ne!(a, CacheKey::for_request(&other_backend));
    }

    #[test]
    fn disk_cache_first_writer_wins_and_preserves_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::open(dir.path()).unwrap();
        let r = req("p");
        let key = CacheKey::for_request(&r);
        let text = "  [Action]: long \r\n\n";
        let stored = cache.put(IndexEntry::describe(&key, &r, text, None), text).unwrap();
        assert_eq!(&*stored, text);
        let second = cache.put(IndexEntry::describe(&key, &r, "other", None), "other").unwrap();
        assert_eq!(&*second, text);

        let reopened = DiskCache::open(dir.path()).unwrap();
        assert_eq!(reopened.get(&key).unwrap().as_deref(), Some(text));
        assert_eq!(reopened.len(), 1);
        let index = reopened.read_index().unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index[0].key, key);
    }
}
