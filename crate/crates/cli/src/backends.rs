//! Builds a gateway from the configured backends.

use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use desksim::domain::BackendId;
use desksim::gateway::http::{ApiFlavor, HttpBackend, HttpBackendConfig};
use desksim::gateway::{DiskCache, Gateway, RetryPolicy};

use crate::config::{BackendConfig, Credential, RunConfig, GEMINI_BASE_URL, OPENAI_BASE_URL};

pub fn build_gateway(config: &RunConfig, credentials: &[Credential]) -> anyhow::Result<Gateway> {
    let cache = DiskCache::open(&config.run.cache_dir)
        .with_context(|| format!("opening cache at {}", config.run.cache_dir.display()))?;
    let retry = RetryPolicy { max_attempts: config.run.max_attempts, ..RetryPolicy::default() };
    let mut gateway = Gateway::new(Arc::new(cache)).with_retry(retry);
    for (name, backend) in &config.backends {
        let id = BackendId::new(name.clone());
        match backend {
            BackendConfig::Scripted { rules } => {
                gateway.register_scripted(name.clone(), BackendConfig::script(rules));
            }
            BackendConfig::Openai(remote) | BackendConfig::Gemini(remote) => {
                let (flavor, default_url) = match backend {
                    BackendConfig::Openai(_) => (ApiFlavor::OpenAiChat, OPENAI_BASE_URL),
                    _ => (ApiFlavor::GeminiGenerate, GEMINI_BASE_URL),
                };
                let api_key = credentials
                    .iter()
                    .find(|c| &c.backend == name)
                    .map(|c| c.api_key.clone())
                    .with_context(|| format!("no credential resolved for backend `{name}`"))?;
                let http = HttpBackend::new(HttpBackendConfig {
                    flavor,
                    base_url: remote.base_url.clone().unwrap_or_else(|| default_url.to_string()),
                    api_key,
                    model: remote.model.clone(),
                    timeout: Duration::from_secs(remote.timeout_secs),
                });
                gateway.register(id, Arc::new(http), remote.requests_per_minute);
            }
        }
    }
    Ok(gateway)
}
