//! Aggregate measurements over outcome logs.
//!
//! Every ratio keeps its integer numerator and denominator; a zero
//! denominator is undefined rather than zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Decision, EffectiveDate, NewsArticle, Seniority, TradingCalendar};
use crate::market::{align_article, forward_move, AlignError, Direction, LabelBook, PriceBook};
use crate::strategy::PipelineOutcome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no usable outcomes")]
    EmptyInput,
    #[error("the two logs share no article")]
    DisjointLogs,
    #[error("article `{0}` appears twice in one log")]
    DuplicateArticle(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(num <= den || den == 0);
        Self { num, den }
    }

    pub fn value(self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    pub fn percent(self) -> Option<f64> {
        self.value().map(|v| v * 100.0)
    }

    /// Percent scaled by 100 and rounded half up, computed on integers.
    pub fn centipercent(self) -> Option<u64> {
        (self.den > 0).then(|| {
            let num = self.num as u128 * 20_000 + self.den as u128;
            (num / (2 * self.den as u128)) as u64
        })
    }

    pub fn merge(self, other: Ratio) -> Ratio {
        Ratio { num: self.num + other.num, den: self.den + other.den }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.centipercent() {
            Some(cp) => write!(f, "{}.{:02}%", cp / 100, cp % 100),
            None => f.write_str("—"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionStats {
    /// Counts in table order: overweight, neutral, underweight.
    pub counts: [u64; 3],
    pub skipped: u64,
}

impl DecisionStats {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn share(&self, decision: Decision) -> Ratio {
        Ratio::new(self.counts[decision.index()], self.total())
    }

    pub fn proportions(&self) -> [f64; 3] {
        let total = self.total() as f64;
        self.counts.map(|c| c as f64 / total)
    }

    pub fn merge(mut self, other: &DecisionStats) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.skipped += other.skipped;
        self
    }
}

/// `None` entries are skipped outcomes.
pub fn decision_stats(decisions: impl IntoIterator<Item = Option<Decision>>) -> Result<DecisionStats, MetricsError> {
    let mut stats = DecisionStats::default();
    for d in decisions {
        match d {
            Some(d) => stats.counts[d.index()] += 1,
            None => stats.skipped += 1,
        }
    }
    if stats.total() == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(stats)
}

pub fn outcome_decision_stats(outcomes: &[PipelineOutcome]) -> Result<DecisionStats, MetricsError> {
    decision_stats(outcomes.iter().map(PipelineOutcome::decision))
}

/// One agent decision joined to the institution label it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledDecision {
    pub agent: Option<Decision>,
    pub label: Result<Decision, LabelGap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelGap {
    Missing,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyCoverage {
    pub neutral: u64,
    pub skipped: u64,
    pub missing_label: u64,
    pub ambiguous_label: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub overall: Ratio,
    pub overweight: Ratio,
    pub underweight: Ratio,
    pub excluded: ConsistencyCoverage,
}

impl ConsistencyReport {
    pub fn merge(self, other: &ConsistencyReport) -> Self {
        let e = &other.excluded;
        Self {
            overall: self.overall.merge(other.overall),
            overweight: self.overweight.merge(other.overweight),
            underweight: self.underweight.merge(other.underweight),
            excluded: ConsistencyCoverage {
                neutral: self.excluded.neutral + e.neutral,
                skipped: self.excluded.skipped + e.skipped,
                missing_label: self.excluded.missing_label + e.missing_label,
                ambiguous_label: self.excluded.ambiguous_label + e.ambiguous_label,
            },
        }
    }
}

/// Share of actionable agent decisions that equal the institution label,
/// overall and per agent class.
pub fn consistency(rows: impl IntoIterator<Item = LabeledDecision>) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    for row in rows {
        let agent = match row.agent {
            None => {
                report.excluded.skipped += 1;
                continue;
            }
            Some(Decision::Neutral) => {
                report.excluded.neutral += 1;
                continue;
            }
            Some(d) => d,
        };
        let label = match row.label {
            Ok(label) => label,
            Err(LabelGap::Missing) => {
                report.excluded.missing_label += 1;
                continue;
            }
            Err(LabelGap::Ambiguous) => {
                report.excluded.ambiguous_label += 1;
                continue;
            }
        };
        let hit = u64::from(agent == label);
        let class = if agent == Decision::Overweight { &mut report.overweight } else { &mut report.underweight };
        class.num += hit;
        class.den += 1;
    }
    report.overall = report.overweight.merge(report.underweight);
    report
}

fn label_for(
    ticker: &str,
    published_at: NaiveDate,
    labels: &LabelBook,
    calendar: &TradingCalendar,
    policy: EffectiveDate,
) -> Result<Decision, LabelGap> {
    let probe = NewsArticle {
        article_id: String::new(),
        ticker: ticker.to_string(),
        published_at,
        title: String::new(),
        content: String::new(),
        source: String::new(),
    };
    match align_article(&probe, labels, calendar, policy) {
        Ok(l) => Ok(l.label),
        Err(AlignError::AmbiguousLabel { .. }) => Err(LabelGap::Ambiguous),
        Err(_) => Err(LabelGap::Missing),
    }
}

pub fn outcome_consistency(
    outcomes: &[PipelineOutcome],
    labels: &LabelBook,
    calendar: &TradingCalendar,
    policy: EffectiveDate,
) -> ConsistencyReport {
    consistency(outcomes.iter().map(|o| LabeledDecision {
        agent: o.decision(),
        label: label_for(&o.ticker, o.published_at, labels, calendar, policy),
    }))
}

/// Institution label distribution over the evaluated articles.
pub fn institution_stats(
    outcomes: &[PipelineOutcome],
    labels: &LabelBook,
    calendar: &TradingCalendar,
    policy: EffectiveDate,
) -> Result<DecisionStats, MetricsError> {
    decision_stats(outcomes.iter().map(|o| label_for(&o.ticker, o.published_at, labels, calendar, policy).ok()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTab {
    /// `cells[a][b]` counts articles decided `a` by the first log and `b`
    /// by the second, indexed in table order.
    pub cells: [[u64; 3]; 3],
    pub skipped_pairs: u64,
}

impl CrossTab {
    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn add(&mut self, a: Decision, b: Decision) {
        self.cells[a.index()][b.index()] += 1;
    }

    pub fn joint(&self, a: Decision, b: Decision) -> Ratio {
        Ratio::new(self.cells[a.index()][b.index()], self.total())
    }

    pub fn row_marginal(&self, a: Decision) -> Ratio {
        Ratio::new(self.cells[a.index()].iter().sum(), self.total())
    }

    pub fn col_marginal(&self, b: Decision) -> Ratio {
        Ratio::new(self.cells.iter().map(|r| r[b.index()]).sum(), self.total())
    }

    pub fn agreement(&self) -> Ratio {
        Ratio::new((0..3).map(|i| self.cells[i][i]).sum(), self.total())
    }
}

fn index_by_article(log: &[PipelineOutcome]) -> Result<HashMap<&str, Option<Decision>>, MetricsError> {
    let mut map = HashMap::with_capacity(log.len());
    for o in log {
        if map.insert(o.article_id.as_str(), o.decision()).is_some() {
            return Err(MetricsError::DuplicateArticle(o.article_id.clone()));
        }
    }
    Ok(map)
}

/// Joint decision counts over articles present in both logs.
pub fn cross_tab(a: &[PipelineOutcome], b: &[PipelineOutcome]) -> Result<CrossTab, MetricsError> {
    let left = index_by_article(a)?;
    let right = index_by_article(b)?;
    let mut tab = CrossTab::default();
    let mut shared = 0usize;
    for (id, da) in &left {
        let Some(db) = right.get(id) else { continue };
        shared += 1;
        match (da, db) {
            (Some(x), Some(y)) => tab.add(*x, *y),
            _ => tab.skipped_pairs += 1,
        }
    }
    if shared == 0 {
        return Err(MetricsError::DisjointLogs);
    }
    Ok(tab)
}

/// Head-trader approvals per seniority of the suggesting trader. Only
/// outcomes where the head trader was invoked enter the denominator.
pub fn approval_stats(outcomes: &[PipelineOutcome]) -> Result<BTreeMap<Seniority, Ratio>, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut out: BTreeMap<Seniority, Ratio> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.strategy.has_head_trader()) {
        let entry = out.entry(o.variant.seniority).or_default();
        if let Some(v) = &o.head_verdict {
            entry.den += 1;
            entry.num += u64::from(v.verdict.is_approval());
        }
    }
    Ok(out)
}

/// A classed decision anchored at a base date.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketItem {
    pub ticker: String,
    pub base_date: NaiveDate,
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonAlignment {
    pub overweight: Ratio,
    pub underweight: Ratio,
    pub missing_price: u64,
}

impl HorizonAlignment {
    pub fn overall(&self) -> Ratio {
        self.overweight.merge(self.underweight)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketConsistency {
    pub by_horizon: BTreeMap<usize, HorizonAlignment>,
    /// Items with no classed decision (neutral or skipped).
    pub unclassed: u64,
}

impl MarketConsistency {
    pub fn at(&self, horizon: usize) -> HorizonAlignment {
        self.by_horizon.get(&horizon).copied().unwrap_or_default()
    }
}

/// Overweight items count as aligned when the close rises over the
/// horizon, underweight items when it falls. A flat close aligns neither.
pub fn market_consistency(
    items: &[MarketItem],
    prices: &PriceBook,
    calendar: &TradingCalendar,
    horizons: &[usize],
) -> MarketConsistency {
    let mut out = MarketConsistency::default();
    for &h in horizons {
        out.by_horizon.entry(h).or_default();
    }
    for item in items {
        let class = match item.decision {
            Some(d @ (Decision::Overweight | Decision::Underweight)) => d,
            _ => {
                out.unclassed += 1;
                continue;
            }
        };
        for &h in horizons {
            let cell = out.by_horizon.get_mut(&h).expect("horizon initialised");
            let Ok(mv) = forward_move(prices, &item.ticker, item.base_date, h, calendar) else {
                cell.missing_price += 1;
                continue;
            };
            let (ratio, want) = match class {
                Decision::Overweight => (&mut cell.overweight, Direction::Up),
                _ => (&mut cell.underweight, Direction::Down),
            };
            ratio.den += 1;
            ratio.num += u64::from(mv.direction == want);
        }
    }
    out
}

pub fn outcome_market_items(outcomes: &[PipelineOutcome], policy: EffectiveDate) -> Vec<MarketItem> {
    outcomes
        .iter()
        .map(|o| MarketItem {
            ticker: o.ticker.clone(),
            base_date: policy.apply(o.published_at),
            decision: o.decision(),
        })
        .collect()
}

/// The institution label each outcome's article aligns to, anchored at the
/// same base date as the agent decision.
pub fn institution_market_items(
    outcomes: &[PipelineOutcome],
    labels: &LabelBook,
    calendar: &TradingCalendar,
    policy: EffectiveDate,
) -> Vec<MarketItem> {
    outcomes
        .iter()
        .map(|o| MarketItem {
            ticker: o.ticker.clone(),
            base_date: policy.apply(o.published_at),
            decision: label_for(&o.ticker, o.published_at, labels, calendar, policy).ok(),
        })
        .collect()
}
