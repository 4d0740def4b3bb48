//! `replay-seniority`: re-run only the head trader of an HO/HOm log under
//! both seniorities, against the frozen analyst reports and suggestions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use anyhow::anyhow;
use chrono::Utc;
use desksim::agency::{Agents, Transcript};
use desksim::domain::{NewsArticle, PromptVariant, Seniority, StrategyKind};
use desksim::outcome_log::read_outcomes;
use desksim::strategy::{Final, SuggestionMode};
use desksim::{Engine, PipelineOutcome};

use crate::artifacts::{sha256_file, write_outcome_log, MANIFEST_FILE, TRANSCRIPTS_FILE};
use crate::backends::build_gateway;
use crate::config::RunConfig;
use crate::failure::{Classify, Failure};
use crate::manifest::{Coverage, RunManifest};
use crate::pool::run_ordered;
use crate::simulate::{load_news, load_templates, stitch, write_transcript_file, RunSummary};
use crate::Env;

pub fn log_file(seniority: Seniority) -> String {
    format!("{}.jsonl", seniority.word())
}

/// A skipped source outcome that never produced suggestions stays skipped.
fn carried_skip(source: &PipelineOutcome, article: &NewsArticle, variant: PromptVariant) -> PipelineOutcome {
    let mut o = PipelineOutcome::new(article, &source.strategy, variant);
    o.mode = SuggestionMode::Replayed;
    o.skipped = source.skipped.clone();
    o
}

/// The HO/HOm outcomes to replay, one per (strategy, article, horizon).
/// Other strategies and repeated seniorities are dropped with a warning.
fn select_source<'a>(source: &'a [PipelineOutcome], config: &RunConfig) -> Result<Vec<&'a PipelineOutcome>, Failure> {
    if source.is_empty() {
        return Err(Failure::Data(anyhow!("source log is empty")));
    }
    let mut seen = HashSet::new();
    let (mut flat, mut repeated) = (0usize, 0usize);
    let mut picked = Vec::new();
    for o in source {
        let head = match &o.strategy {
            StrategyKind::HO { head, .. } | StrategyKind::HOm { head, .. } => head,
            _ => {
                flat += 1;
                continue;
            }
        };
        if !seen.insert((o.strategy.clone(), o.article_id.as_str(), o.variant.horizon)) {
            repeated += 1;
            continue;
        }
        if config.backend(head).is_none() {
            return Err(Failure::Config(anyhow!("head-trader backend `{head}` is not configured")));
        }
        let carried = o.final_decision == Final::Skipped && o.trader_suggestions.is_empty();
        if !carried && (o.trader_suggestions.is_empty() || o.analyst_report.is_none()) {
            return Err(Failure::Data(anyhow!(
                "outcome {} carries no trader suggestions or analyst report to replay",
                o.article_id
            )));
        }
        picked.push(o);
    }
    if picked.is_empty() {
        return Err(Failure::Data(anyhow!("source log has no HO or HOm outcomes; only those have a head trader")));
    }
    if flat > 0 {
        log::warn!("ignoring {flat} outcomes from strategies without a head trader");
    }
    if repeated > 0 {
        log::warn!("ignoring {repeated} outcomes that repeat an article under another seniority");
    }
    Ok(picked)
}

pub fn replay_seniority(config: &RunConfig, source_log: &Path, env: Env<'_>) -> Result<RunSummary, Failure> {
    let started = Utc::now();
    config.check_run_settings().config_err()?;
    let credentials = config.check_backends(env).config_err()?;
    let templates = load_templates(config)?;
    let (news, news_digest) = load_news(config)?;
    let source = read_outcomes(source_log).data_err()?;
    let source = select_source(&source, config)?;
    let by_id: HashMap<&str, &NewsArticle> = news.iter().map(|a| (a.article_id.as_str(), a)).collect();
    let mut jobs = Vec::new();
    for &o in &source {
        let article = by_id
            .get(o.article_id.as_str())
            .ok_or_else(|| Failure::Data(anyhow!("article {} is not in the news corpus", o.article_id)))?;
        for seniority in Seniority::ALL {
            jobs.push((o, *article, PromptVariant::new(o.variant.horizon, seniority)));
        }
    }

    let gateway = build_gateway(config, &credentials)?;
    let engine = Engine::new(Agents::new(&gateway, &templates, config.sampling));
    let results = run_ordered(&jobs, config.run.workers, |(src, article, variant)| {
        if src.final_decision == Final::Skipped && src.trader_suggestions.is_empty() {
            return Ok((carried_skip(src, article, *variant), Transcript::new()));
        }
        engine.replay_head(src, article, *variant)
    });
    let results: Vec<_> = results.into_iter().collect::<Result<_, _>>().data_err()?;
    let (outcomes, calls) = stitch(results);

    let out = &config.run.output_dir;
    let mut outputs = BTreeMap::new();
    for seniority in Seniority::ALL {
        let part: Vec<PipelineOutcome> =
            outcomes.iter().filter(|o| o.variant.seniority == seniority).cloned().collect();
        let name = log_file(seniority);
        outputs.insert(name.clone(), write_outcome_log(&out.join(&name), &part)?);
    }
    outputs.insert(TRANSCRIPTS_FILE.to_string(), write_transcript_file(out, &calls)?);
    let coverage = Coverage::tally(source.len(), &outcomes);
    let skipped = coverage.skipped;
    let inputs = BTreeMap::from([
        ("news".to_string(), news_digest),
        ("source_log".to_string(), sha256_file(source_log).data_err()?),
    ]);
    RunManifest::new("replay-seniority", config, &templates, &gateway, started, coverage, outputs, inputs)
        .write(&out.join(MANIFEST_FILE))?;
    Ok(RunSummary { output_dir: out.clone(), outcomes: outcomes.len(), skipped, gateway: gateway.stats() })
}
