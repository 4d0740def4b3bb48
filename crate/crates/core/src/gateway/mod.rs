//! Uniform chat-completion interface over remote providers and scripted
//! backends, with cache-first lookup, bounded retries and per-backend
//! admission control.

mod cache;
#[cfg(feature = "http")]
pub mod http;
mod scripted;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::BackendId;

pub use cache::{CacheKey, DiskCache, IndexEntry, MemoryCache, ResponseStore};
pub use scripted::{PromptMatcher, Script, ScriptRule, ScriptedBackend};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub temperature: f64,
    pub max_output: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { temperature: 0.0, max_output: 512 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub backend: BackendId,
    pub prompt: String,
    pub sampling: Sampling,
}

impl CompletionRequest {
    pub fn new(backend: BackendId, prompt: impl Into<String>) -> Self {
        Self { backend, prompt: prompt.into(), sampling: Sampling::default() }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    /// Raw model output, never trimmed.
    pub text: Arc<str>,
    pub latency: Duration,
    pub cache_hit: bool,
    pub key: CacheKey,
}

/// Failure reported by a single backend attempt.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// Worth retrying: timeouts, 5xx, dropped connections.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("backend `{backend}` unavailable: {cause}")]
    BackendUnavailable { backend: BackendId, cause: String },
    #[error("backend `{backend}` still rate limited after {attempts} attempts")]
    RateLimited { backend: BackendId, attempts: u32 },
    #[error("backend `{backend}` returned no text")]
    EmptyResponse { backend: BackendId },
    #[error("response cache: {0}")]
    Cache(String),
    #[error("empty prompt for backend `{0}`")]
    EmptyPrompt(BackendId),
}

pub trait Backend: Send + Sync {
    /// `key` is the unscoped request key.
    fn complete(&self, req: &CompletionRequest, key: &CacheKey) -> Result<String, BackendError>;

    /// Identity of what answers behind this backend name; part of the cache
    /// key so a changed model or script never reads stale replies.
    fn fingerprint(&self) -> String {
        String::new()
    }

    /// Model identifier as reported by the provider, if known.
    fn model_id(&self) -> Option<String> {
        None
    }

    fn is_remote(&self) -> bool {
        true
    }
}

/// Exponential backoff: `base_delay * 2^attempt`, capped at `max_delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 5, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(30) }
    }
}

impl RetryPolicy {
    pub fn immediate(max_attempts: u32) -> Self {
        Self { max_attempts, base_delay: Duration::ZERO, max_delay: Duration::ZERO }
    }

    pub fn delay_before(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.min(31)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Minimum spacing between admissions to one backend.
struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn per_minute(requests: u32) -> Self {
        let interval = if requests == 0 { Duration::ZERO } else { Duration::from_secs(60) / requests };
        Self { interval, next_slot: Mutex::new(None) }
    }

    fn admit(&self) {
        let wait = {
            let mut slot = self.next_slot.lock().expect("limiter lock");
            let now = Instant::now();
            let start = slot.map_or(now, |s| s.max(now));
            *slot = Some(start + self.interval);
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

struct Registered {
    backend: Arc<dyn Backend>,
    limiter: Option<RateLimiter>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    /// Backend invocations that left the process (remote backends only).
    pub remote_calls: u64,
    /// All backend invocations, scripted included.
    pub backend_calls: u64,
    pub cache_hits: u64,
}

pub struct Gateway {
    backends: HashMap<BackendId, Registered>,
    store: Arc<dyn ResponseStore>,
    retry: RetryPolicy,
    remote_calls: AtomicU64,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
    models: Mutex<BTreeMap<BackendId, String>>,
}

impl Gateway {
    pub fn new(store: Arc<dyn ResponseStore>) -> Self {
        Self {
            backends: HashMap::new(),
            store,
            retry: RetryPolicy::default(),
            remote_calls: AtomicU64::new(0),
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            models: Mutex::default(),
        }
    }

    pub fn in_memory() -> Self {
        Self::new(Arc::new(MemoryCache::new()))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn register(
        &mut self,
        id: BackendId,
        backend: Arc<dyn Backend>,
        requests_per_minute: Option<u32>,
    ) -> BackendId {
        let limiter = requests_per_minute.map(RateLimiter::per_minute);
        self.backends.insert(id.clone(), Registered { backend, limiter });
        id
    }

    pub fn register_scripted(&mut self, name: impl Into<String>, script: Script) -> BackendId {
        self.register(BackendId::new(name), Arc::new(ScriptedBackend::new(script)), None)
    }

    pub fn is_registered(&self, id: &BackendId) -> bool {
        self.backends.contains_key(id)
    }

    pub fn store(&self) -> &Arc<dyn ResponseStore> {
        &self.store
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            remote_calls: self.remote_calls.load(Ordering::Relaxed),
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    /// Model identifiers reported by backends actually invoked so far.
    pub fn reported_models(&self) -> BTreeMap<BackendId, String> {
        self.models.lock().expect("models lock").clone()
    }

    /// Cache-first completion. On a miss the registered backend is called
    /// with bounded retries and the response is stored before returning.
    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        if req.prompt.is_empty() {
            return Err(GatewayError::EmptyPrompt(req.backend.clone()));
        }
        let started = Instant::now();
        let registered = self.backends.get(&req.backend).ok_or_else(|| GatewayError::BackendUnavailable {
            backend: req.backend.clone(),
            cause: "backend not registered".to_string(),
        })?;
        let request_key = CacheKey::for_request(req);
        let key = request_key.scoped(&registered.backend.fingerprint());
        if let Some(text) = self.store.get(&key).map_err(|e| GatewayError::Cache(e.to_string()))? {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(CompletionResponse { text, latency: started.elapsed(), cache_hit: true, key });
        }

        let text = self.call_with_retry(req, &request_key, registered)?;
        if text.is_empty() {
            return Err(GatewayError::EmptyResponse { backend: req.backend.clone() });
        }
        let model = registered.backend.model_id();
        if let Some(m) = &model {
            self.models.lock().expect("models lock").insert(req.backend.clone(), m.clone());
        }
        let entry = IndexEntry::describe(&key, req, &text, model);
        let text = self.store.put(entry, &text).map_err(|e| GatewayError::Cache(e.to_string()))?;
        Ok(CompletionResponse { text, latency: started.elapsed(), cache_hit: false, key })
    }

    fn call_with_retry(
        &self,
        req: &CompletionRequest,
        key: &CacheKey,
        registered: &Registered,
    ) -> Result<String, GatewayError> {
        let attempts = self.retry.max_attempts.max(1);
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(self.retry.delay_before(attempt - 1));
            }
            if let Some(limiter) = &registered.limiter {
                limiter.admit();
            }
            self.backend_calls.fetch_add(1, Ordering::Relaxed);
            if registered.backend.is_remote() {
                self.remote_calls.fetch_add(1, Ordering::Relaxed);
            }
            match registered.backend.complete(req, key) {
                Ok(text) => return Ok(text),
                Err(BackendError::Fatal(cause)) => {
                    return Err(GatewayError::BackendUnavailable { backend: req.backend.clone(), cause })
                }
                Err(e) => {
                    log::warn!("backend {} attempt {} failed: {e}", req.backend, attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(match last {
            Some(BackendError::RateLimited(_)) => GatewayError::RateLimited { backend: req.backend.clone(), attempts },
            other => GatewayError::BackendUnavailable {
                backend: req.backend.clone(),
                cause: other.map(|e| e.to_string()).unwrap_or_default(),
            },
        })
    }
}
