//! Corpus ingestion, institution labels and forward price moves.
//!
//! File formats:
//!
//! * news: JSON lines with `date` (YYYY-MM-DD), `ticker`, `title`,
//!   `content`, `source` and an optional `id` (defaults to
//!   `{ticker}-{date}-{line}`).
//! * trading records: CSV with header `date,ticker,total_buy,total_sell,institutions`.
//! * prices: CSV with header `date,ticker,close`.
//! * calendar: one `YYYY-MM-DD` per line; blank lines and `#` comments ignored.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CalendarError, Decision, EffectiveDate, NewsArticle, PricePoint, TradingCalendar, TradingRecord};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}")]
    Io { path: String, source: io::Error },
    #[error("{origin} line {line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("duplicate article id `{0}`")]
    DuplicateArticle(String),
    #[error("duplicate trading record for {ticker} on {date}")]
    DuplicateRecord { ticker: String, date: NaiveDate },
    #[error("trading record for {ticker} on {date} has volume but no institutions")]
    InconsistentRecord { ticker: String, date: NaiveDate },
    #[error("non-positive close {close} for {ticker} on {date}")]
    NonPositivePrice { ticker: String, date: NaiveDate, close: f64 },
    #[error("duplicate price for {ticker} on {date}")]
    DuplicatePrice { ticker: String, date: NaiveDate },
    #[error("calendar: {0}")]
    Calendar(#[from] CalendarError),
}

fn open(path: &Path) -> Result<fs::File, DataError> {
    fs::File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Deserialize)]
struct NewsRow {
    #[serde(default, alias = "article_id")]
    id: Option<String>,
    date: NaiveDate,
    ticker: String,
    title: String,
    content: String,
    #[serde(default)]
    source: String,
}

pub fn parse_news(reader: impl Read, origin: &str) -> Result<Vec<NewsArticle>, DataError> {
    let mut seen = HashSet::new();
    let mut articles = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| DataError::Io { path: origin.to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| DataError::Parse { origin: origin.to_string(), line: line_no, message };
        let row: NewsRow = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if row.ticker.trim().is_empty() {
            return Err(parse_err("empty ticker".into()));
        }
        let article_id = row.id.unwrap_or_else(|| format!("{}-{}-{}", row.ticker, row.date, line_no));
        if !seen.insert(article_id.clone()) {
            return Err(DataError::DuplicateArticle(article_id));
        }
        articles.push(NewsArticle {
            article_id,
            ticker: row.ticker,
            published_at: row.date,
            title: row.title,
            content: row.content,
            source: row.source,
        });
    }
    Ok(articles)
}

pub fn read_news(path: impl AsRef<Path>) -> Result<Vec<NewsArticle>, DataError> {
    let path = path.as_ref();
    parse_news(open(path)?, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
struct RecordRow {
    date: NaiveDate,
    ticker: String,
    total_buy: u64,
    total_sell: u64,
    institutions: u32,
}

fn csv_rows<T: for<'de> Deserialize<'de>>(reader: impl Read, origin: &str) -> Result<Vec<T>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| DataError::Parse { origin: origin.to_string(), line: i + 2, message: e.to_string() })
        })
        .collect()
}

pub fn parse_trading_records(reader: impl Read, origin: &str) -> Result<Vec<TradingRecord>, DataError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in csv_rows::<RecordRow>(reader, origin)? {
        let record = TradingRecord {
            ticker: row.ticker,
            trade_date: row.date,
            total_buy_volume: row.total_buy,
            total_sell_volume: row.total_sell,
            institution_count: row.institutions,
        };
        if !record.is_consistent() {
            return Err(DataError::InconsistentRecord { ticker: record.ticker, date: record.trade_date });
        }
        if !seen.insert((record.ticker.clone(), record.trade_date)) {
            return Err(DataError::DuplicateRecord { ticker: record.ticker, date: record.trade_date });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_trading_records(path: impl AsRef<Path>) -> Result<Vec<TradingRecord>, DataError> {
    let path = path.as_ref();
    parse_trading_records(open(path)?, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
struct PriceRow {
    date: NaiveDate,
    ticker: String,
    close: f64,
}

pub fn parse_prices(reader: impl Read, origin: &str) -> Result<Vec<PricePoint>, DataError> {
    csv_rows::<PriceRow>(reader, origin)?
        .into_iter()
        .map(|row| {
            if !(row.close > 0.0 && row.close.is_finite()) {
                return Err(DataError::NonPositivePrice { ticker: row.ticker, date: row.date, close: row.close });
            }
            Ok(PricePoint { ticker: row.ticker, trade_date: row.date, close_price: row.close })
        })
        .collect()
}

pub fn read_prices(path: impl AsRef<Path>) -> Result<Vec<PricePoint>, DataError> {
    let path = path.as_ref();
    parse_prices(open(path)?, &path.display().to_string())
}

pub fn parse_calendar(reader: impl Read, origin: &str) -> Result<TradingCalendar, DataError> {
    let mut dates = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| DataError::Io { path: origin.to_string(), source })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let date = line.parse::<NaiveDate>().map_err(|e| DataError::Parse {
            origin: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        dates.push(date);
    }
    Ok(TradingCalendar::new(dates)?)
}

pub fn read_calendar(path: impl AsRef<Path>) -> Result<TradingCalendar, DataError> {
    let path = path.as_ref();
    parse_calendar(open(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionLabel {
    pub ticker: String,
    pub trade_date: NaiveDate,
    pub label: Decision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("institutions traded {ticker} on {date} with equal buy and sell volume")]
    AmbiguousLabel { ticker: String, date: NaiveDate },
}

/// Overweight when buying exceeds selling, underweight when selling exceeds
/// buying, neutral when no institution traded.
pub fn label_record(record: &TradingRecord) -> Result<Decision, LabelError> {
    use std::cmp::Ordering::*;
    if record.institution_count == 0 {
        return Ok(Decision::Neutral);
    }
    match record.total_buy_volume.cmp(&record.total_sell_volume) {
        Greater => Ok(Decision::Overweight),
        Less => Ok(Decision::Underweight),
        Equal => Err(LabelError::AmbiguousLabel { ticker: record.ticker.clone(), date: record.trade_date }),
    }
}

/// Institution labels keyed by (ticker, trade date). Tied days are kept
/// aside so alignment can report them rather than treat them as missing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelBook {
    labels: HashMap<(String, NaiveDate), Decision>,
    ambiguous: HashSet<(String, NaiveDate)>,
}

impl LabelBook {
    pub fn get(&self, ticker: &str, date: NaiveDate) -> Option<Decision> {
        self.labels.get(&(ticker.to_string(), date)).copied()
    }

    pub fn is_ambiguous(&self, ticker: &str, date: NaiveDate) -> bool {
        self.ambiguous.contains(&(ticker.to_string(), date))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ambiguous_count(&self) -> usize {
        self.ambiguous.len()
    }

    pub fn insert(&mut self, ticker: impl Into<String>, date: NaiveDate, label: Decision) {
        self.labels.insert((ticker.into(), date), label);
    }

    /// Label counts in table order (overweight, neutral, underweight).
    pub fn proportions(&self) -> [u64; 3] {
        let mut counts = [0u64; 3];
        for d in self.labels.values() {
            counts[d.index()] += 1;
        }
        counts
    }
}

pub fn build_labels<'a>(records: impl IntoIterator<Item = &'a TradingRecord>) -> LabelBook {
    let mut book = LabelBook::default();
    for record in records {
        let key = (record.ticker.clone(), record.trade_date);
        match label_record(record) {
            Ok(label) => {
                book.labels.insert(key, label);
            }
            Err(LabelError::AmbiguousLabel { .. }) => {
                book.ambiguous.insert(key);
            }
        }
    }
    book
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("no institution label for {ticker} on {date}")]
    MissingLabel { ticker: String, date: NaiveDate },
    #[error("institution label for {ticker} on {date} is a buy/sell tie")]
    AmbiguousLabel { ticker: String, date: NaiveDate },
    #[error("no trading day after {0} in the calendar")]
    CalendarExhausted(NaiveDate),
}

/// Institution label on the first trading day after the article's
/// effective date.
pub fn align_article(
    article: &NewsArticle,
    labels: &LabelBook,
    calendar: &TradingCalendar,
    policy: EffectiveDate,
) -> Result<InstitutionLabel, AlignError> {
    let effective = policy.apply(article.published_at);
    let date = calendar.next_trading_day(effective, 1).map_err(|_| AlignError::CalendarExhausted(effective))?;
    match labels.get(&article.ticker, date) {
        Some(label) => Ok(InstitutionLabel { ticker: article.ticker.clone(), trade_date: date, label }),
        None if labels.is_ambiguous(&article.ticker, date) => {
            Err(AlignError::AmbiguousLabel { ticker: article.ticker.clone(), date })
        }
        None => Err(AlignError::MissingLabel { ticker: article.ticker.clone(), date }),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceBook {
    closes: HashMap<(String, NaiveDate), f64>,
}

impl PriceBook {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a PricePoint>) -> Result<Self, DataError> {
        let mut closes = HashMap::new();
        for p in points {
            if closes.insert((p.ticker.clone(), p.trade_date), p.close_price).is_some() {
                return Err(DataError::DuplicatePrice { ticker: p.ticker.clone(), date: p.trade_date });
            }
        }
        Ok(Self { closes })
    }

    pub fn insert(&mut self, ticker: impl Into<String>, date: NaiveDate, close: f64) {
        self.closes.insert((ticker.into(), date), close);
    }

    pub fn close(&self, ticker: &str, date: NaiveDate) -> Option<f64> {
        self.closes.get(&(ticker.to_string(), date)).copied()
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    /// Every date with at least one close, as a calendar.
    pub fn implied_calendar(&self) -> TradingCalendar {
        TradingCalendar::from_unordered(self.closes.keys().map(|(_, d)| *d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardMove {
    pub ticker: String,
    pub base_date: NaiveDate,
    pub horizon: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no close for {ticker} on {date}")]
pub struct MissingPrice {
    pub ticker: String,
    pub date: NaiveDate,
}

/// Direction of close(t + horizon trading days) against close(t). A base
/// date that is not a trading day uses the latest trading day before it.
pub fn forward_move(
    prices: &PriceBook,
    ticker: &str,
    base_date: NaiveDate,
    horizon: usize,
    calendar: &TradingCalendar,
) -> Result<ForwardMove, MissingPrice> {
    let missing = |date| MissingPrice { ticker: ticker.to_string(), date };
    let anchor = calendar.on_or_before(base_date).ok_or_else(|| missing(base_date))?;
    let target = calendar.next_trading_day(anchor, horizon).map_err(|_| missing(anchor))?;
    let start = prices.close(ticker, anchor).ok_or_else(|| missing(anchor))?;
    let end = prices.close(ticker, target).ok_or_else(|| missing(target))?;
    let direction = if end > start {
        Direction::Up
    } else if end < start {
        Direction::Down
    } else {
        Direction::Flat
    };
    Ok(ForwardMove { ticker: ticker.to_string(), base_date, horizon, direction })
}
