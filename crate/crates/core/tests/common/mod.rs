#![allow(dead_code)]

use chrono::NaiveDate;
use desksim::domain::{BackendId, NewsArticle, PromptVariant, StrategyKind};
use desksim::{Decision, Final, PipelineOutcome};

pub fn date(offset: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + chrono::Days::new(offset)
}

pub fn article(id: &str, ticker: &str, published_at: NaiveDate) -> NewsArticle {
    NewsArticle {
        article_id: id.to_string(),
        ticker: ticker.to_string(),
        published_at,
        title: format!("title {id}"),
        content: format!("content {id}"),
        source: "fixture".into(),
    }
}

pub fn single_trader() -> StrategyKind {
    StrategyKind::SingleTrader { trader: BackendId::new("m") }
}

pub fn outcome(id: &str, decision: Option<Decision>) -> PipelineOutcome {
    let mut o = PipelineOutcome::new(&article(id, "2330", date(0)), &single_trader(), PromptVariant::default());
    o.final_decision = decision.map_or(Final::Skipped, Final::from);
    o
}
