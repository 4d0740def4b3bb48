//! `validate-data`: load every corpus file and report coverage.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use desksim::domain::{EffectiveDate, TradingCalendar};
use desksim::market::{
    align_article, build_labels, forward_move, read_calendar, read_news, read_prices, read_trading_records, AlignError,
    PriceBook,
};
use serde::Serialize;

use crate::failure::{Classify, Failure};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataPaths {
    pub news: Option<PathBuf>,
    pub trading: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DataSummary {
    pub articles: Option<usize>,
    pub tickers: Option<usize>,
    pub trading_records: Option<usize>,
    /// Overweight, neutral and underweight record counts.
    pub label_counts: Option<[u64; 3]>,
    pub ambiguous_labels: Option<usize>,
    pub price_points: Option<usize>,
    pub calendar_days: usize,
    pub aligned_articles: Option<usize>,
    pub missing_label: Option<usize>,
    pub ambiguous_label: Option<usize>,
    /// Articles lacking a close at the base date or t+1 / t+5.
    pub missing_price_t1: Option<usize>,
    pub missing_price_t5: Option<usize>,
}

impl DataSummary {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |name: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "{name:<18} {v}");
            }
        };
        line("articles", self.articles.map(|v| v.to_string()));
        line("tickers", self.tickers.map(|v| v.to_string()));
        line("trading records", self.trading_records.map(|v| v.to_string()));
        line("labels (O/N/U)", self.label_counts.map(|c| format!("{} / {} / {}", c[0], c[1], c[2])));
        line("tied buy/sell", self.ambiguous_labels.map(|v| v.to_string()));
        line("price points", self.price_points.map(|v| v.to_string()));
        line("calendar days", Some(self.calendar_days.to_string()));
        line("aligned articles", self.aligned_articles.map(|v| v.to_string()));
        line("missing label", self.missing_label.map(|v| v.to_string()));
        line("tied label", self.ambiguous_label.map(|v| v.to_string()));
        line("no price t+1", self.missing_price_t1.map(|v| v.to_string()));
        line("no price t+5", self.missing_price_t5.map(|v| v.to_string()));
        out
    }
}

pub fn validate_data(paths: &DataPaths, policy: EffectiveDate) -> Result<DataSummary, Failure> {
    let mut s = DataSummary::default();
    let news = paths.news.as_ref().map(read_news).transpose().data_err()?;
    let records = paths.trading.as_ref().map(read_trading_records).transpose().data_err()?;
    let prices = match &paths.prices {
        Some(p) => Some(PriceBook::from_points(&read_prices(p).data_err()?).data_err()?),
        None => None,
    };
    let calendar = match (&paths.calendar, &prices, &records) {
        (Some(p), _, _) => read_calendar(p).data_err()?,
        (None, Some(p), _) => p.implied_calendar(),
        (None, None, Some(r)) => TradingCalendar::from_unordered(r.iter().map(|r| r.trade_date)),
        _ => TradingCalendar::default(),
    };
    s.calendar_days = calendar.len();
    if let Some(news) = &news {
        s.articles = Some(news.len());
        s.tickers = Some(news.iter().map(|a| a.ticker.as_str()).collect::<BTreeSet<_>>().len());
    }
    let labels = records.as_ref().map(build_labels);
    if let (Some(records), Some(labels)) = (&records, &labels) {
        s.trading_records = Some(records.len());
        s.label_counts = Some(labels.proportions());
        s.ambiguous_labels = Some(labels.ambiguous_count());
    }
    if let Some(p) = &prices {
        s.price_points = Some(p.len());
    }
    if let (Some(news), Some(labels)) = (&news, &labels) {
        let (mut ok, mut missing, mut tied) = (0, 0, 0);
        for a in news {
            match align_article(a, labels, &calendar, policy) {
                Ok(_) => ok += 1,
                Err(AlignError::AmbiguousLabel { .. }) => tied += 1,
                Err(_) => missing += 1,
            }
        }
        s.aligned_articles = Some(ok);
        s.missing_label = Some(missing);
        s.ambiguous_label = Some(tied);
    }
    if let (Some(news), Some(prices)) = (&news, &prices) {
        let missing = |h| {
            news.iter()
                .filter(|a| forward_move(prices, &a.ticker, policy.apply(a.published_at), h, &calendar).is_err())
                .count()
        };
        s.missing_price_t1 = Some(missing(1));
        s.missing_price_t5 = Some(missing(5));
    }
    Ok(s)
}
