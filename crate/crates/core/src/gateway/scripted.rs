//! Deterministic backend driven by an ordered list of prompt matchers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, CacheKey, CompletionRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMatcher {
    Any,
    /// Every listed substring must occur in the prompt.
    Contains(Vec<String>),
    Key(CacheKey),
}

impl PromptMatcher {
    pub fn matches(&self, prompt: &str, key: &CacheKey) -> bool {
        match self {
            PromptMatcher::Any => true,
            PromptMatcher::Contains(needles) => needles.iter().all(|n| prompt.contains(n.as_str())),
            PromptMatcher::Key(k) => k == key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptRule {
    pub when: PromptMatcher,
    pub reply: String,
}

/// Rules are tried in insertion order; the first match answers. A prompt no
/// rule matches gets an empty reply.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Script {
    rules: Vec<ScriptRule>,
}

impl Script {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(mut self, when: PromptMatcher, reply: impl Into<String>) -> Self {
        self.rules.push(ScriptRule { when, reply: reply.into() });
        self
    }

    pub fn when_contains(self, needle: impl Into<String>, reply: impl Into<String>) -> Self {
        self.rule(PromptMatcher::Contains(vec![needle.into()]), reply)
    }

    pub fn when_all(self, needles: &[&str], reply: impl Into<String>) -> Self {
        self.rule(PromptMatcher::Contains(needles.iter().map(|s| s.to_string()).collect()), reply)
    }

    pub fn when_key(self, key: CacheKey, reply: impl Into<String>) -> Self {
        self.rule(PromptMatcher::Key(key), reply)
    }

    pub fn otherwise(self, reply: impl Into<String>) -> Self {
        self.rule(PromptMatcher::Any, reply)
    }

    pub fn rules(&self) -> &[ScriptRule] {
        &self.rules
    }

    pub fn reply_for(&self, prompt: &str, key: &CacheKey) -> Option<&str> {
        self.rules.iter().find(|r| r.when.matches(prompt, key)).map(|r| r.reply.as_str())
    }
}

impl From<Vec<ScriptRule>> for Script {
    fn from(rules: Vec<ScriptRule>) -> Self {
        Self { rules }
    }
}

pub struct ScriptedBackend {
    script: Script,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        Self { script }
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, req: &CompletionRequest, key: &CacheKey) -> Result<String, BackendError> {
        Ok(self.script.reply_for(&req.prompt, key).unwrap_or_default().to_string())
    }

    fn fingerprint(&self) -> String {
        let rules = serde_json::to_vec(&self.script).expect("script serializes");
        format!("scripted:{}", hex::encode(Sha256::digest(&rules)))
    }

    fn model_id(&self) -> Option<String> {
        Some("scripted".to_string())
    }

    fn is_remote(&self) -> bool {
        false
    }
}
