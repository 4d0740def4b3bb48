//! Remote chat-completion adapters over blocking HTTP.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, CacheKey, CompletionRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApiFlavor {
    /// `POST {base}/chat/completions` with bearer auth.
    OpenAiChat,
    /// `POST {base}/models/{model}:generateContent?key=...`.
    GeminiGenerate,
}

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub flavor: ApiFlavor,
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    agent: ureq::Agent,
    reported_model: Mutex<Option<String>>,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent, reported_model: Mutex::new(None) }
    }

    fn endpoint(&self) -> String {
        let base = self.config.base_url.trim_end_matches('/');
        match self.config.flavor {
            ApiFlavor::OpenAiChat => format!("{base}/chat/completions"),
            ApiFlavor::GeminiGenerate => {
                format!("{base}/models/{}:generateContent?key={}", self.config.model, self.config.api_key)
            }
        }
    }

    fn body(&self, req: &CompletionRequest) -> Value {
        match self.config.flavor {
            ApiFlavor::OpenAiChat => json!({
                "model": self.config.model,
                "messages": [{"role": "user", "content": req.prompt}],
                "temperature": req.sampling.temperature,
                "max_tokens": req.sampling.max_output,
            }),
            ApiFlavor::GeminiGenerate => json!({
                "contents": [{"role": "user", "parts": [{"text": req.prompt}]}],
                "generationConfig": {
                    "temperature": req.sampling.temperature,
                    "maxOutputTokens": req.sampling.max_output,
                },
            }),
        }
    }
}

/// Pulls the reply text and reported model name out of a provider response.
pub fn extract_reply(flavor: ApiFlavor, body: &Value) -> Option<(String, Option<String>)> {
    match flavor {
        ApiFlavor::OpenAiChat => {
            let text = body["choices"][0]["message"]["content"].as_str()?.to_string();
            Some((text, body["model"].as_str().map(str::to_string)))
        }
        ApiFlavor::GeminiGenerate => {
            let parts = body["candidates"][0]["content"]["parts"].as_array()?;
            let text: String = parts.iter().filter_map(|p| p["text"].as_str()).collect();
            Some((text, body["modelVersion"].as_str().map(str::to_string)))
        }
    }
}

fn classify_status(status: u16, body: &str) -> BackendError {
    let snippet: String = body.chars().take(200).collect();
    match status {
        429 => BackendError::RateLimited(format!("HTTP 429: {snippet}")),
        408 | 500..=599 => BackendError::Transient(format!("HTTP {status}: {snippet}")),
        _ => BackendError::Fatal(format!("HTTP {status}: {snippet}")),
    }
}

impl Backend for HttpBackend {
    fn complete(&self, req: &CompletionRequest, _key: &CacheKey) -> Result<String, BackendError> {
        let payload = self.body(req).to_string();
        let mut call = self.agent.post(&self.endpoint()).header("Content-Type", "application/json");
        if self.config.flavor == ApiFlavor::OpenAiChat {
            call = call.header("Authorization", &format!("Bearer {}", self.config.api_key));
        }
        let mut resp = call.send(payload.as_bytes()).map_err(|e| BackendError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| BackendError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &text));
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Fatal(format!("malformed response body: {e}")))?;
        let (reply, model) = extract_reply(self.config.flavor, &body).unwrap_or_default();
        if let Some(model) = model {
            *self.reported_model.lock().expect("model lock") = Some(model);
        }
        Ok(reply)
    }

    fn fingerprint(&self) -> String {
        format!("{:?}:{}", self.config.flavor, self.config.model)
    }

    fn model_id(&self) -> Option<String> {
        self.reported_model.lock().expect("model lock").clone().or_else(|| Some(self.config.model.clone()))
    }
}
