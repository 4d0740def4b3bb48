//! `simulate`: run every configured strategy and variant over the corpus.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use chrono::Utc;
use desksim::agency::{AgentCall, Agents, Transcript};
use desksim::domain::{NewsArticle, PromptVariant, StrategyKind};
use desksim::gateway::GatewayStats;
use desksim::market::read_news;
use desksim::prompts::TemplateSet;
use desksim::strategy::TranscriptRef;
use desksim::{Engine, PipelineOutcome};

use crate::artifacts::{
    sha256_file, write_outcome_log, write_transcripts, MANIFEST_FILE, OUTCOMES_FILE, TRANSCRIPTS_FILE,
};
use crate::backends::build_gateway;
use crate::config::RunConfig;
use crate::failure::{Classify, Failure};
use crate::manifest::{Coverage, RunManifest};
use crate::pool::run_ordered;
use crate::Env;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub outcomes: usize,
    pub skipped: usize,
    pub gateway: GatewayStats,
}

pub fn load_templates(config: &RunConfig) -> Result<TemplateSet, Failure> {
    match &config.corpus.templates {
        Some(dir) => TemplateSet::load_dir(dir).config_err(),
        None => Ok(TemplateSet::builtin()),
    }
}

pub fn load_news(config: &RunConfig) -> Result<(Vec<NewsArticle>, String), Failure> {
    let path = config.corpus.news.as_ref().ok_or_else(|| Failure::Config(anyhow!("corpus.news is not set")))?;
    let news = read_news(path).data_err()?;
    if news.is_empty() {
        return Err(Failure::Data(anyhow!("news corpus {} is empty", path.display())));
    }
    Ok((news, sha256_file(path).data_err()?))
}

/// Numbers transcripts consecutively in job order and points each outcome
/// at its range.
pub fn stitch(results: Vec<(PipelineOutcome, Transcript)>) -> (Vec<PipelineOutcome>, Vec<AgentCall>) {
    let mut outcomes = Vec::with_capacity(results.len());
    let mut calls = Vec::new();
    for (mut outcome, transcript) in results {
        outcome.transcript_ref = TranscriptRef { first: calls.len() as u64, count: transcript.len() as u32 };
        calls.extend(transcript);
        outcomes.push(outcome);
    }
    (outcomes, calls)
}

pub fn write_transcript_file(dir: &Path, calls: &[AgentCall]) -> anyhow::Result<String> {
    write_transcripts(&dir.join(TRANSCRIPTS_FILE), calls.iter().enumerate().map(|(i, c)| (i as u64, c)))
}

pub fn simulate(config: &RunConfig, env: Env<'_>) -> Result<RunSummary, Failure> {
    let started = Utc::now();
    let credentials = config.check_simulation(env).config_err()?;
    let templates = load_templates(config)?;
    let (news, news_digest) = load_news(config)?;
    let gateway = build_gateway(config, &credentials)?;
    let engine =
        Engine::new(Agents::new(&gateway, &templates, config.sampling)).with_trader_input(config.run.trader_input);

    let variants = config.variants();
    let mut jobs: Vec<(&StrategyKind, PromptVariant, &NewsArticle)> = Vec::new();
    for strategy in &config.strategies {
        for variant in &variants {
            for article in &news {
                jobs.push((strategy, *variant, article));
            }
        }
    }
    log::info!("simulating {} jobs on {} workers", jobs.len(), config.run.workers);
    let results = run_ordered(&jobs, config.run.workers, |(s, v, a)| engine.run(s, a, *v));
    let (outcomes, calls) = stitch(results);

    let out = &config.run.output_dir;
    let mut outputs = BTreeMap::new();
    outputs.insert(OUTCOMES_FILE.to_string(), write_outcome_log(&out.join(OUTCOMES_FILE), &outcomes)?);
    outputs.insert(TRANSCRIPTS_FILE.to_string(), write_transcript_file(out, &calls)?);
    let coverage = Coverage::tally(news.len(), &outcomes);
    let skipped = coverage.skipped;
    let inputs = BTreeMap::from([("news".to_string(), news_digest)]);
    RunManifest::new("simulate", config, &templates, &gateway, started, coverage, outputs, inputs)
        .write(&out.join(MANIFEST_FILE))?;

    Ok(RunSummary { output_dir: out.clone(), outcomes: outcomes.len(), skipped, gateway: gateway.stats() })
}
