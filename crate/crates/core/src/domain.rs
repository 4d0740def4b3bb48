//! Shared vocabulary: decisions, agent actions, strategies, prompt variant
//! axes, corpus rows and the trading calendar.

use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Three-way stance on a stock, shared by agents and institution labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Overweight,
    Neutral,
    Underweight,
}

impl Decision {
    /// Table order used by every report: overweight, neutral, underweight.
    pub const ALL: [Decision; 3] = [Decision::Overweight, Decision::Neutral, Decision::Underweight];

    pub fn index(self) -> usize {
        match self {
            Decision::Overweight => 0,
            Decision::Neutral => 1,
            Decision::Underweight => 2,
        }
    }

    pub fn is_actionable(self) -> bool {
        self != Decision::Neutral
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Overweight => "overweight",
            Decision::Neutral => "neutral",
            Decision::Underweight => "underweight",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The action vocabulary a trader agent is asked to answer with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentAction {
    Long,
    Short,
    Neither,
}

impl AgentAction {
    pub const ALL: [AgentAction; 3] = [AgentAction::Long, AgentAction::Short, AgentAction::Neither];

    /// The token as it appears in the trader response template.
    pub fn token(self) -> &'static str {
        match self {
            AgentAction::Long => "long",
            AgentAction::Short => "short",
            AgentAction::Neither => "neither",
        }
    }

    pub fn from_decision(decision: Decision) -> Self {
        match decision {
            Decision::Overweight => AgentAction::Long,
            Decision::Neutral => AgentAction::Neither,
            Decision::Underweight => AgentAction::Short,
        }
    }

    pub fn is_actionable(self) -> bool {
        self != AgentAction::Neither
    }
}

impl fmt::Display for AgentAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

pub fn action_to_decision(action: AgentAction) -> Decision {
    match action {
        AgentAction::Long => Decision::Overweight,
        AgentAction::Short => Decision::Underweight,
        AgentAction::Neither => Decision::Neutral,
    }
}

impl From<AgentAction> for Decision {
    fn from(action: AgentAction) -> Self {
        action_to_decision(action)
    }
}

/// Short identifier of a completion backend, e.g. `provider-a` or `scripted`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BackendId(String);

impl BackendId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BackendId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("HOm needs two distinct trader backends, got `{0}` twice")]
    DuplicateTraderBackend(BackendId),
}

/// A communication strategy together with the backend playing each role.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    SingleTrader {
        trader: BackendId,
    },
    #[serde(rename = "cot")]
    CoT {
        analyst: BackendId,
        trader: BackendId,
    },
    #[serde(rename = "ho")]
    HO {
        analyst: BackendId,
        trader: BackendId,
        head: BackendId,
    },
    #[serde(rename = "hom")]
    HOm {
        analyst: BackendId,
        trader_a: BackendId,
        trader_b: BackendId,
        head: BackendId,
    },
}

impl StrategyKind {
    /// Builds an HOm strategy, rejecting identical trader backends.
    pub fn hom(
        analyst: BackendId,
        trader_a: BackendId,
        trader_b: BackendId,
        head: BackendId,
    ) -> Result<Self, StrategyError> {
        if trader_a == trader_b {
            return Err(StrategyError::DuplicateTraderBackend(trader_a));
        }
        Ok(StrategyKind::HOm { analyst, trader_a, trader_b, head })
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        match self {
            StrategyKind::HOm { trader_a, trader_b, .. } if trader_a == trader_b => {
                Err(StrategyError::DuplicateTraderBackend(trader_a.clone()))
            }
            _ => Ok(()),
        }
    }

    /// Human-readable row label, e.g. `HO^m (provider-b)`.
    pub fn label(&self) -> String {
        match self {
            StrategyKind::SingleTrader { .. } => "Single Trader".to_string(),
            StrategyKind::CoT { trader, .. } => format!("CoT ({trader})"),
            StrategyKind::HO { .. } => "HO".to_string(),
            StrategyKind::HOm { head, .. } => format!("HO^m ({head})"),
        }
    }

    pub fn has_head_trader(&self) -> bool {
        matches!(self, StrategyKind::HO { .. } | StrategyKind::HOm { .. })
    }

    pub fn backends(&self) -> Vec<&BackendId> {
        match self {
            StrategyKind::SingleTrader { trader } => vec![trader],
            StrategyKind::CoT { analyst, trader } => vec![analyst, trader],
            StrategyKind::HO { analyst, trader, head } => vec![analyst, trader, head],
            StrategyKind::HOm { analyst, trader_a, trader_b, head } => {
                vec![analyst, trader_a, trader_b, head]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// One week.
    #[default]
    ShortTerm,
    /// One year.
    LongTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seniority {
    #[default]
    Junior,
    Senior,
}

impl Horizon {
    pub const ALL: [Horizon; 2] = [Horizon::ShortTerm, Horizon::LongTerm];
}

impl Seniority {
    pub const ALL: [Seniority; 2] = [Seniority::Junior, Seniority::Senior];

    pub fn word(self) -> &'static str {
        match self {
            Seniority::Junior => "junior",
            Seniority::Senior => "senior",
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Horizon::ShortTerm => "short-term",
            Horizon::LongTerm => "long-term",
        })
    }
}

impl fmt::Display for Seniority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "short-term" | "short" => Ok(Horizon::ShortTerm),
            "long-term" | "long" => Ok(Horizon::LongTerm),
            other => Err(format!("unknown horizon `{other}`")),
        }
    }
}

impl FromStr for Seniority {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "junior" => Ok(Seniority::Junior),
            "senior" => Ok(Seniority::Senior),
            other => Err(format!("unknown seniority `{other}`")),
        }
    }
}

/// Which spans of the prompt templates are swapped for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PromptVariant {
    pub horizon: Horizon,
    pub seniority: Seniority,
}

impl PromptVariant {
    pub fn new(horizon: Horizon, seniority: Seniority) -> Self {
        Self { horizon, seniority }
    }

    pub fn all() -> impl Iterator<Item = PromptVariant> {
        Horizon::ALL.into_iter().flat_map(|h| Seniority::ALL.into_iter().map(move |s| PromptVariant::new(h, s)))
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.horizon, self.seniority)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub article_id: String,
    pub ticker: String,
    pub published_at: NaiveDate,
    pub title: String,
    pub content: String,
    pub source: String,
}

/// Daily institutional trading totals for one ticker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingRecord {
    pub ticker: String,
    pub trade_date: NaiveDate,
    pub total_buy_volume: u64,
    pub total_sell_volume: u64,
    pub institution_count: u32,
}

impl TradingRecord {
    /// No institutions trading implies no volume either way.
    pub fn is_consistent(&self) -> bool {
        self.institution_count > 0 || (self.total_buy_volume == 0 && self.total_sell_volume == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub ticker: String,
    pub trade_date: NaiveDate,
    pub close_price: f64,
}

/// How an article's publication date maps to the date its decision is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectiveDate {
    /// Decision date is the publication date, trading day or not.
    #[default]
    PublicationDay,
    /// Treat every article as published after the close: shift one calendar day.
    FollowingDay,
}

impl EffectiveDate {
    pub fn apply(self, published_at: NaiveDate) -> NaiveDate {
        match self {
            EffectiveDate::PublicationDay => published_at,
            EffectiveDate::FollowingDay => published_at.checked_add_days(Days::new(1)).unwrap_or(published_at),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("trading calendar has fewer than {k} dates after {date}")]
    CalendarExhausted { date: NaiveDate, k: usize },
    #[error("trading calendar offset must be at least 1")]
    ZeroOffset,
    #[error("trading calendar is not strictly increasing at {0}")]
    NotIncreasing(NaiveDate),
}

/// Strictly increasing list of trading dates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self, CalendarError> {
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(CalendarError::NotIncreasing(w[1]));
        }
        Ok(Self { dates })
    }

    /// Sorts and deduplicates arbitrary dates into a calendar.
    pub fn from_unordered(dates: impl IntoIterator<Item = NaiveDate>) -> Self {
        let mut dates: Vec<NaiveDate> = dates.into_iter().collect();
        dates.sort_unstable();
        dates.dedup();
        Self { dates }
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.binary_search(&date).is_ok()
    }

    /// The k-th trading date strictly after `date` (k >= 1).
    pub fn next_trading_day(&self, date: NaiveDate, k: usize) -> Result<NaiveDate, CalendarError> {
        if k == 0 {
            return Err(CalendarError::ZeroOffset);
        }
        let first_after = self.dates.partition_point(|d| *d <= date);
        self.dates.get(first_after + k - 1).copied().ok_or(CalendarError::CalendarExhausted { date, k })
    }

    /// Latest trading date on or before `date`.
    pub fn on_or_before(&self, date: NaiveDate) -> Option<NaiveDate> {
        let idx = self.dates.partition_point(|d| *d <= date);
        idx.checked_sub(1).map(|i| self.dates[i])
    }
}

pub fn next_trading_day(calendar: &TradingCalendar, date: NaiveDate, k: usize) -> Result<NaiveDate, CalendarError> {
    calendar.next_trading_day(date, k)
}
