//! `evaluate`: report files from outcome logs and market data.

use std::path::{Path, PathBuf};

use anyhow::anyhow;
use desksim::domain::{EffectiveDate, Horizon, PromptVariant, Seniority, StrategyKind, TradingCalendar};
use desksim::market::{build_labels, read_calendar, read_prices, read_trading_records, LabelBook, PriceBook};
use desksim::metrics::{
    approval_stats, cross_tab, institution_market_items, institution_stats, market_consistency, outcome_consistency,
    outcome_decision_stats, outcome_market_items, MetricsError,
};
use desksim::outcome_log::read_outcomes;
use desksim::report::{
    approval_table, consistency_table, crosstab_table, decisions_table, market_table, Report, ReportKind, Stamp, Table,
};
use desksim::strategy::SuggestionMode;
use desksim::PipelineOutcome;

use crate::artifacts::{sha256_file, write_atomic};
use crate::failure::{Classify, Failure};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub logs: Vec<PathBuf>,
    pub trading: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub reports: Vec<ReportKind>,
    pub out_dir: PathBuf,
    pub manifest: Option<PathBuf>,
    pub effective_date: EffectiveDate,
    pub market_horizons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct GroupKey {
    strategy: StrategyKind,
    variant: PromptVariant,
    mode: SuggestionMode,
}

impl GroupKey {
    fn label(&self) -> String {
        let replay = if self.mode == SuggestionMode::Replayed { ", replayed" } else { "" };
        format!("{} [{}, {}{replay}]", self.strategy.label(), self.variant.horizon, self.variant.seniority)
    }
}

/// Outcomes grouped by strategy, variant and mode, in first-seen order.
struct Groups(Vec<(GroupKey, Vec<PipelineOutcome>)>);

impl Groups {
    fn build(outcomes: Vec<PipelineOutcome>) -> Self {
        let mut groups: Vec<(GroupKey, Vec<PipelineOutcome>)> = Vec::new();
        for o in outcomes {
            let key = GroupKey { strategy: o.strategy.clone(), variant: o.variant, mode: o.mode };
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(o),
                None => groups.push((key, vec![o])),
            }
        }
        Groups(groups)
    }

    fn find(
        &self,
        strategy: &StrategyKind,
        variant: PromptVariant,
        mode: SuggestionMode,
    ) -> Option<&[PipelineOutcome]> {
        self.0
            .iter()
            .find(|(k, _)| k.strategy == *strategy && k.variant == variant && k.mode == mode)
            .map(|(_, v)| v.as_slice())
    }

    /// One outcome per distinct article, for institution rows.
    fn distinct_articles(&self) -> Vec<PipelineOutcome> {
        let mut seen = std::collections::HashSet::new();
        self.0.iter().flat_map(|(_, v)| v.iter()).filter(|o| seen.insert(o.article_id.clone())).cloned().collect()
    }
}

struct Market {
    labels: Option<LabelBook>,
    prices: Option<PriceBook>,
    calendar: TradingCalendar,
}

fn load_market(opts: &EvaluateOptions) -> Result<Market, Failure> {
    let labels = match &opts.trading {
        Some(p) => {
            let records = read_trading_records(p).data_err()?;
            let book = build_labels(&records);
            if book.ambiguous_count() > 0 {
                log::warn!("{} trading records have tied buy/sell volume and are excluded", book.ambiguous_count());
            }
            Some((book, records))
        }
        None => None,
    };
    let prices = match &opts.prices {
        Some(p) => Some(PriceBook::from_points(&read_prices(p).data_err()?).data_err()?),
        None => None,
    };
    let calendar = match (&opts.calendar, &prices, &labels) {
        (Some(p), _, _) => read_calendar(p).data_err()?,
        (None, Some(prices), _) => prices.implied_calendar(),
        (None, None, Some((_, records))) => TradingCalendar::from_unordered(records.iter().map(|r| r.trade_date)),
        (None, None, None) => TradingCalendar::default(),
    };
    Ok(Market { labels: labels.map(|(b, _)| b), prices, calendar })
}

fn need<'a, T>(what: Option<&'a T>, kind: ReportKind, flag: &str) -> Result<&'a T, Failure> {
    what.ok_or_else(|| Failure::Config(anyhow!("report `{}` needs {flag}", kind.as_str())))
}

fn build_tables(
    kind: ReportKind,
    groups: &Groups,
    market: &Market,
    opts: &EvaluateOptions,
) -> Result<Vec<Table>, Failure> {
    let policy = opts.effective_date;
    let tables = match kind {
        ReportKind::Decisions => {
            let mut rows = Vec::new();
            for (key, outcomes) in &groups.0 {
                match outcome_decision_stats(outcomes) {
                    Ok(s) => rows.push((key.label(), s)),
                    Err(MetricsError::EmptyInput) => log::warn!("{}: every outcome was skipped", key.label()),
                    Err(e) => return Err(Failure::Data(e.into())),
                }
            }
            if let Some(labels) = &market.labels {
                if let Ok(s) = institution_stats(&groups.distinct_articles(), labels, &market.calendar, policy) {
                    rows.push(("Institutions".to_string(), s));
                }
            }
            vec![decisions_table(&rows)]
        }
        ReportKind::Consistency => {
            let labels = need(market.labels.as_ref(), kind, "--trading")?;
            let rows: Vec<_> = groups
                .0
                .iter()
                .map(|(k, o)| (k.label(), outcome_consistency(o, labels, &market.calendar, policy)))
                .collect();
            vec![consistency_table(&rows)]
        }
        ReportKind::Crosstab => crosstabs(groups)?,
        ReportKind::Approval => {
            let mut merged: Vec<((StrategyKind, Horizon, SuggestionMode), Vec<PipelineOutcome>)> = Vec::new();
            for (k, o) in groups.0.iter().filter(|(k, _)| k.strategy.has_head_trader()) {
                let key = (k.strategy.clone(), k.variant.horizon, k.mode);
                match merged.iter_mut().find(|(mk, _)| *mk == key) {
                    Some((_, v)) => v.extend(o.iter().cloned()),
                    None => merged.push((key, o.clone())),
                }
            }
            let mut rows = Vec::new();
            for ((strategy, horizon, mode), outcomes) in &merged {
                let replay = if *mode == SuggestionMode::Replayed { ", replayed" } else { "" };
                let stats = approval_stats(outcomes).data_err()?;
                rows.push((format!("{} [{horizon}{replay}]", strategy.label()), stats));
            }
            let mut t = approval_table(&rows);
            if rows.is_empty() {
                t.note("no head-trader outcomes in the logs");
            }
            vec![t]
        }
        ReportKind::Market => {
            let prices = need(market.prices.as_ref(), kind, "--prices")?;
            let horizons = &opts.market_horizons;
            let mut rows: Vec<_> = groups
                .0
                .iter()
                .map(|(k, o)| {
                    let items = outcome_market_items(o, policy);
                    (k.label(), market_consistency(&items, prices, &market.calendar, horizons))
                })
                .collect();
            if let Some(labels) = &market.labels {
                let items = institution_market_items(&groups.distinct_articles(), labels, &market.calendar, policy);
                rows.push(("Institutions".to_string(), market_consistency(&items, prices, &market.calendar, horizons)));
            }
            vec![market_table(&rows, horizons)]
        }
    };
    Ok(tables)
}

/// Short- against long-term and junior against senior, wherever a log holds
/// both sides of a pair.
fn crosstabs(groups: &Groups) -> Result<Vec<Table>, Failure> {
    let mut tables = Vec::new();
    for (key, left) in &groups.0 {
        let v = key.variant;
        let pairs = [
            (v.horizon == Horizon::ShortTerm)
                .then(|| (PromptVariant::new(Horizon::LongTerm, v.seniority), "short-term", "long-term")),
            (v.seniority == Seniority::Junior)
                .then(|| (PromptVariant::new(v.horizon, Seniority::Senior), "junior", "senior")),
        ];
        for (other, rows_axis, cols_axis) in pairs.into_iter().flatten() {
            let Some(right) = groups.find(&key.strategy, other, key.mode) else { continue };
            let tab = match cross_tab(left, right) {
                Ok(t) => t,
                Err(MetricsError::DisjointLogs) => continue,
                Err(e) => return Err(Failure::Data(e.into())),
            };
            let fixed = if rows_axis == "short-term" { v.seniority.to_string() } else { v.horizon.to_string() };
            let title = format!("{} ({fixed}): {rows_axis} vs {cols_axis}", key.strategy.label());
            tables.push(crosstab_table(&title, rows_axis, cols_axis, &tab));
        }
    }
    if tables.is_empty() {
        let mut t = Table::new("Paired decisions", &["pair"]);
        t.note("no paired variants over a shared article set");
        tables.push(t);
    }
    Ok(tables)
}

/// Writes `<kind>.txt` and `<kind>.json` per requested kind and returns the
/// paths written.
pub fn evaluate(opts: &EvaluateOptions) -> Result<Vec<PathBuf>, Failure> {
    if opts.reports.is_empty() {
        log::warn!("no report kinds requested; nothing to do");
        return Ok(Vec::new());
    }
    if opts.logs.is_empty() {
        return Err(Failure::Config(anyhow!("no outcome logs given")));
    }
    let mut outcomes = Vec::new();
    let mut stamp = Stamp::default();
    for log in &opts.logs {
        outcomes.extend(read_outcomes(log).data_err()?);
        stamp.logs.push((display(log), sha256_file(log).data_err()?));
    }
    if let Some(m) = &opts.manifest {
        stamp.manifest_digest = Some(sha256_file(m).data_err()?);
    }
    let market = load_market(opts)?;
    let groups = Groups::build(outcomes);

    let mut written = Vec::new();
    for kind in &opts.reports {
        let report = Report { kind: *kind, stamp: stamp.clone(), tables: build_tables(*kind, &groups, &market, opts)? };
        for (ext, body) in [("txt", report.render_text()), ("json", report.to_json())] {
            let path = opts.out_dir.join(format!("{}.{ext}", kind.as_str()));
            write_atomic(&path, body.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
