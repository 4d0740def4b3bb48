use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use desksim::agency::TraderInput;
use desksim::domain::{EffectiveDate, Horizon, Seniority};
use desksim::report::ReportKind;
use desksim_cli::config::RunConfig;
use desksim_cli::evaluate::{evaluate, EvaluateOptions};
use desksim_cli::failure::Classify;
use desksim_cli::replay::replay_seniority;
use desksim_cli::simulate::{simulate, RunSummary};
use desksim_cli::validate::{validate_data, DataPaths};
use desksim_cli::{process_env, Completion, Failure};

/// Trading-desk agent simulations over financial news.
#[derive(Parser)]
#[command(name = "desksim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured strategies over the news corpus.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
        #[arg(long)]
        news: Option<PathBuf>,
        /// Repeatable; replaces run.horizons.
        #[arg(long = "horizon")]
        horizons: Vec<Horizon>,
        /// Repeatable; replaces run.seniorities.
        #[arg(long = "seniority")]
        seniorities: Vec<Seniority>,
        #[arg(long, value_parser = parse_trader_input)]
        trader_input: Option<TraderInput>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        max_output: Option<u32>,
    },
    /// Compute report tables from outcome logs.
    Evaluate {
        /// Outcome log; repeatable.
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        /// Supplies corpus paths and defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated: decisions,consistency,crosstab,approval,market.
        #[arg(long, value_delimiter = ',')]
        reports: Option<Vec<String>>,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        /// Run manifest whose digest is stamped on every report.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_parser = parse_effective_date)]
        effective_date: Option<EffectiveDate>,
    },
    /// Re-run head traders of an HO/HOm log under junior and senior prompts.
    ReplaySeniority {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Check corpus files and report label and price coverage.
    ValidateData {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        news: Option<PathBuf>,
        #[arg(long, value_parser = parse_effective_date)]
        effective_date: Option<EffectiveDate>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunOverrides {
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    max_attempts: Option<u32>,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    trading: Option<PathBuf>,
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long)]
    calendar: Option<PathBuf>,
}

fn parse_trader_input(s: &str) -> Result<TraderInput, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown trader input `{s}` (news, analysis, news-and-analysis)"))
}

fn parse_effective_date(s: &str) -> Result<EffectiveDate, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown effective date `{s}` (publication-day, following-day)"))
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => RunConfig::load(p).config_err(),
        None => Ok(RunConfig::default()),
    }
}

fn apply_overrides(config: &mut RunConfig, o: RunOverrides) {
    let r = &mut config.run;
    if let Some(v) = o.workers {
        r.workers = v;
    }
    if let Some(v) = o.cache_dir {
        r.cache_dir = v;
    }
    if let Some(v) = o.output_dir {
        r.output_dir = v;
    }
    if let Some(v) = o.max_attempts {
        r.max_attempts = v;
    }
}

fn report_run(summary: &RunSummary) -> Completion {
    println!(
        "{} outcomes ({} skipped) in {}; backend calls {}, remote {}, cache hits {}",
        summary.outcomes,
        summary.skipped,
        summary.output_dir.display(),
        summary.gateway.backend_calls,
        summary.gateway.remote_calls,
        summary.gateway.cache_hits
    );
    Completion::from_skips(summary.skipped)
}

fn run(cli: Cli) -> Result<Completion, Failure> {
    match cli.command {
        Command::Simulate { config, overrides, news, horizons, seniorities, trader_input, temperature, max_output } => {
            let mut cfg = load_config(Some(&config))?;
            apply_overrides(&mut cfg, overrides);
            if news.is_some() {
                cfg.corpus.news = news;
            }
            if !horizons.is_empty() {
                cfg.run.horizons = horizons;
            }
            if !seniorities.is_empty() {
                cfg.run.seniorities = seniorities;
            }
            if let Some(v) = trader_input {
                cfg.run.trader_input = v;
            }
            if let Some(v) = temperature {
                cfg.sampling.temperature = v;
            }
            if let Some(v) = max_output {
                cfg.sampling.max_output = v;
            }
            Ok(report_run(&simulate(&cfg, &process_env)?))
        }
        Command::Evaluate { logs, config, data, reports, out, manifest, effective_date } => {
            let cfg = load_config(config.as_ref())?;
            let reports = match reports {
                Some(list) => list
                    .iter()
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<ReportKind>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::Config(anyhow::anyhow!(e)))?,
                None => cfg.evaluate.reports.clone().unwrap_or_else(|| ReportKind::ALL.to_vec()),
            };
            let opts = EvaluateOptions {
                logs,
                trading: data.trading.or(cfg.corpus.trading),
                prices: data.prices.or(cfg.corpus.prices),
                calendar: data.calendar.or(cfg.corpus.calendar),
                reports,
                out_dir: out,
                manifest,
                effective_date: effective_date.unwrap_or(cfg.run.effective_date),
                market_horizons: cfg.evaluate.market_horizons,
            };
            for path in evaluate(&opts)? {
                println!("wrote {}", path.display());
            }
            Ok(Completion::Clean)
        }
        Command::ReplaySeniority { config, source, overrides } => {
            let mut cfg = load_config(Some(&config))?;
            apply_overrides(&mut cfg, overrides);
            Ok(report_run(&replay_seniority(&cfg, &source, &process_env)?))
        }
        Command::ValidateData { config, data, news, effective_date, json } => {
            let cfg = load_config(config.as_ref())?;
            let paths = DataPaths {
                news: news.or(cfg.corpus.news),
                trading: data.trading.or(cfg.corpus.trading),
                prices: data.prices.or(cfg.corpus.prices),
                calendar: data.calendar.or(cfg.corpus.calendar),
            };
            let summary = validate_data(&paths, effective_date.unwrap_or(cfg.run.effective_date))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary).context("serializing summary")?);
            } else {
                print!("{}", summary.render_text());
            }
            Ok(Completion::Clean)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(done) => {
            if let Completion::PartialSkip { skipped } = done {
                eprintln!("warning: {skipped} outcomes were skipped");
            }
            done.exit_code()
        }
        Err(failure) => {
            eprintln!("{failure}");
            failure.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
