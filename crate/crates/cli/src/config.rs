//! The run configuration file (TOML).
//!
//! ```toml
//! [corpus]
//! news = "data/news.jsonl"
//! trading = "data/trading.csv"
//! prices = "data/prices.csv"
//! calendar = "data/calendar.txt"
//!
//! [backends.gpt]
//! kind = "openai"
//! model = "gpt-4o-mini"
//! api_key_env = "OPENAI_API_KEY"
//! requests_per_minute = 60
//!
//! [[strategies]]
//! kind = "ho"
//! analyst = "gpt"
//! trader = "gpt"
//! head = "gpt"
//!
//! [run]
//! horizons = ["short-term", "long-term"]
//! seniorities = ["junior"]
//! workers = 4
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use desksim::agency::TraderInput;
use desksim::domain::{BackendId, EffectiveDate, Horizon, PromptVariant, Seniority, StrategyKind};
use desksim::gateway::{PromptMatcher, Sampling, Script, ScriptRule};
use desksim::report::ReportKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Env;

pub const OPENAI_BASE_URL: &str = "https://api.openai.com/v1";
pub const GEMINI_BASE_URL: &str = "https://generativelanguage.googleapis.com/v1beta";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub corpus: CorpusPaths,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendConfig>,
    #[serde(default)]
    pub strategies: Vec<StrategyKind>,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub evaluate: EvaluateSettings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPaths {
    pub news: Option<PathBuf>,
    pub trading: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    /// Directory overriding the built-in prompt templates.
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Openai(RemoteBackend),
    Gemini(RemoteBackend),
    Scripted { rules: Vec<RuleConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteBackend {
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub base_url: Option<String>,
    pub requests_per_minute: Option<u32>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    120
}

/// A scripted reply; an empty `contains` list matches every prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default)]
    pub contains: Vec<String>,
    pub reply: String,
}

impl BackendConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            BackendConfig::Openai(_) => "openai",
            BackendConfig::Gemini(_) => "gemini",
            BackendConfig::Scripted { .. } => "scripted",
        }
    }

    pub fn requested_model(&self) -> Option<&str> {
        match self {
            BackendConfig::Openai(r) | BackendConfig::Gemini(r) => Some(&r.model),
            BackendConfig::Scripted { .. } => None,
        }
    }

    pub fn script(rules: &[RuleConfig]) -> Script {
        Script::from(
            rules
                .iter()
                .map(|r| ScriptRule {
                    when: if r.contains.is_empty() {
                        PromptMatcher::Any
                    } else {
                        PromptMatcher::Contains(r.contains.clone())
                    },
                    reply: r.reply.clone(),
                })
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default = "default_horizons")]
    pub horizons: Vec<Horizon>,
    #[serde(default = "default_seniorities")]
    pub seniorities: Vec<Seniority>,
    #[serde(default)]
    pub trader_input: TraderInput,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default)]
    pub effective_date: EffectiveDate,
}

fn default_horizons() -> Vec<Horizon> {
    vec![Horizon::ShortTerm]
}

fn default_seniorities() -> Vec<Seniority> {
    vec![Seniority::Junior]
}

fn default_workers() -> usize {
    4
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from(".desksim-cache")
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("desksim-out")
}

fn default_attempts() -> u32 {
    5
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            horizons: default_horizons(),
            seniorities: default_seniorities(),
            trader_input: TraderInput::default(),
            workers: default_workers(),
            cache_dir: default_cache_dir(),
            output_dir: default_output_dir(),
            max_attempts: default_attempts(),
            effective_date: EffectiveDate::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSettings {
    pub reports: Option<Vec<ReportKind>>,
    #[serde(default = "default_market_horizons")]
    pub market_horizons: Vec<usize>,
}

fn default_market_horizons() -> Vec<usize> {
    vec![1, 5]
}

impl Default for EvaluateSettings {
    fn default() -> Self {
        Self { reports: None, market_horizons: default_market_horizons() }
    }
}

/// A remote backend with its credential resolved.
#[derive(Debug, Clone)]
pub struct Credential {
    pub backend: String,
    pub api_key: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve_paths(&base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let c = &mut self.corpus;
        for p in [&mut c.news, &mut c.trading, &mut c.prices, &mut c.calendar, &mut c.templates].into_iter().flatten() {
            fix(p);
        }
        fix(&mut self.run.cache_dir);
        fix(&mut self.run.output_dir);
    }

    pub fn variants(&self) -> Vec<PromptVariant> {
        let mut out = Vec::new();
        for h in &self.run.horizons {
            for s in &self.run.seniorities {
                out.push(PromptVariant::new(*h, *s));
            }
        }
        out
    }

    /// SHA-256 over the canonical JSON form of the effective configuration.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn backend(&self, id: &BackendId) -> Option<&BackendConfig> {
        self.backends.get(id.as_str())
    }

    /// Checks backend definitions and reads every remote credential.
    pub fn check_backends(&self, env: Env<'_>) -> anyhow::Result<Vec<Credential>> {
        let mut creds = Vec::new();
        for (name, backend) in &self.backends {
            match backend {
                BackendConfig::Openai(r) | BackendConfig::Gemini(r) => {
                    if r.model.trim().is_empty() {
                        bail!("backend `{name}` has an empty model name");
                    }
                    let api_key = env(&r.api_key_env).ok_or_else(|| {
                        anyhow!("backend `{name}` needs environment variable {} to be set", r.api_key_env)
                    })?;
                    creds.push(Credential { backend: name.clone(), api_key });
                }
                BackendConfig::Scripted { rules } => {
                    if rules.is_empty() {
                        bail!("scripted backend `{name}` has no rules");
                    }
                }
            }
        }
        Ok(creds)
    }

    /// Checks everything `simulate` needs before any output is written.
    pub fn check_simulation(&self, env: Env<'_>) -> anyhow::Result<Vec<Credential>> {
        if self.strategies.is_empty() {
            bail!("no strategies configured");
        }
        if self.corpus.news.is_none() {
            bail!("corpus.news is not set");
        }
        self.check_run_settings()?;
        let mut seen = HashSet::new();
        for s in &self.strategies {
            s.validate()?;
            if !seen.insert(s) {
                bail!("strategy {} is listed twice", s.label());
            }
            for b in s.backends() {
                if self.backend(b).is_none() {
                    bail!("strategy {} references unknown backend `{b}`", s.label());
                }
            }
        }
        self.check_backends(env)
    }

    pub fn check_run_settings(&self) -> anyhow::Result<()> {
        let r = &self.run;
        if r.horizons.is_empty() || r.seniorities.is_empty() {
            bail!("run.horizons and run.seniorities must be non-empty");
        }
        if r.workers == 0 {
            bail!("run.workers must be at least 1");
        }
        if r.max_attempts == 0 {
            bail!("run.max_attempts must be at least 1");
        }
        if !(self.sampling.temperature >= 0.0 && self.sampling.temperature.is_finite()) {
            bail!("sampling.temperature must be a non-negative number");
        }
        Ok(())
    }
}
