//! Run manifests tie every output to the exact prompts, config and models.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use desksim::gateway::{Gateway, GatewayStats};
use desksim::prompts::TemplateSet;
use desksim::PipelineOutcome;
use serde::{Deserialize, Serialize};

use crate::artifacts::write_atomic;
use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRecord {
    pub kind: String,
    pub requested_model: Option<String>,
    /// Model name the provider reported; absent when every call hit the cache.
    pub reported_model: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub articles: usize,
    pub outcomes: usize,
    pub skipped: usize,
    pub skip_causes: BTreeMap<String, usize>,
}

impl Coverage {
    pub fn tally(articles: usize, outcomes: &[PipelineOutcome]) -> Self {
        let mut c = Coverage { articles, outcomes: outcomes.len(), ..Coverage::default() };
        for o in outcomes {
            if let Some(skip) = &o.skipped {
                c.skipped += 1;
                let cause = match &skip.cause {
                    desksim::agency::SkipCause::Gateway(_) => "gateway",
                    desksim::agency::SkipCause::EmptyResponse => "empty_response",
                    desksim::agency::SkipCause::Parse(_) => "parse",
                    desksim::agency::SkipCause::Prompt(_) => "prompt",
                    desksim::agency::SkipCause::InvalidInput(_) => "invalid_input",
                };
                *c.skip_causes.entry(format!("{}:{cause}", skip.role)).or_default() += 1;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub config_digest: String,
    pub template_digests: BTreeMap<String, String>,
    pub backends: BTreeMap<String, BackendRecord>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub coverage: Coverage,
    pub gateway: GatewayStats,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
    /// Inputs beyond the config (source logs, corpus files) to SHA-256.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: &str,
        config: &RunConfig,
        templates: &TemplateSet,
        gateway: &Gateway,
        started_at: DateTime<Utc>,
        coverage: Coverage,
        outputs: BTreeMap<String, String>,
        inputs: BTreeMap<String, String>,
    ) -> Self {
        let reported = gateway.reported_models();
        let backends = config
            .backends
            .iter()
            .map(|(name, b)| {
                let reported_model = reported.iter().find(|(id, _)| id.as_str() == name).map(|(_, m)| m.clone());
                (
                    name.clone(),
                    BackendRecord {
                        kind: b.kind().to_string(),
                        requested_model: b.requested_model().map(str::to_string),
                        reported_model,
                    },
                )
            })
            .collect();
        Self {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config.digest(),
            template_digests: templates
                .digests()
                .into_iter()
                .map(|(role, digest)| (role.file_name().to_string(), digest))
                .collect(),
            backends,
            started_at,
            finished_at: Utc::now(),
            coverage,
            gateway: gateway.stats(),
            outputs,
            inputs,
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
