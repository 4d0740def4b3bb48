//! Synthetic outcome logs whose counts realise given proportions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use desksim::agency::{AnalystReport, HeadTraderVerdict, TraderSuggestion, Verdict};
use desksim::domain::{
    AgentAction, BackendId, Horizon, NewsArticle, PricePoint, PromptVariant, Seniority, StrategyKind, TradingCalendar,
    TradingRecord,
};
use desksim::{Decision, Final, PipelineOutcome};

pub fn day(n: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, n).unwrap()
}

/// Tue 2 Jan to Wed 10 Jan 2024, weekdays only.
pub fn calendar() -> TradingCalendar {
    TradingCalendar::new(vec![day(2), day(3), day(4), day(5), day(8), day(9), day(10)]).unwrap()
}

pub fn single() -> StrategyKind {
    StrategyKind::SingleTrader { trader: BackendId::new("trader") }
}

pub fn ho() -> StrategyKind {
    StrategyKind::HO {
        analyst: BackendId::new("analyst"),
        trader: BackendId::new("trader"),
        head: BackendId::new("head"),
    }
}

pub fn junior() -> PromptVariant {
    PromptVariant::new(Horizon::ShortTerm, Seniority::Junior)
}

pub fn bare(
    id: &str,
    ticker: &str,
    strategy: &StrategyKind,
    variant: PromptVariant,
    decision: Decision,
) -> PipelineOutcome {
    let article = NewsArticle {
        article_id: id.to_string(),
        ticker: ticker.to_string(),
        published_at: day(2),
        title: String::new(),
        content: String::new(),
        source: String::new(),
    };
    let mut o = PipelineOutcome::new(&article, strategy, variant);
    o.final_decision = Final::from(decision);
    o
}

fn repeat(n: u64, d: Decision, out: &mut Vec<Decision>) {
    out.extend(std::iter::repeat(d).take(n as usize));
}

/// Single-trader log with the given overweight/neutral/underweight counts.
pub fn decision_log(counts: [u64; 3]) -> Vec<PipelineOutcome> {
    let mut ds = Vec::new();
    for (d, n) in Decision::ALL.iter().zip(counts) {
        repeat(n, *d, &mut ds);
    }
    ds.iter().enumerate().map(|(i, d)| bare(&format!("d{i}"), &format!("T{i}"), &single(), junior(), *d)).collect()
}

pub struct Labelled {
    pub outcomes: Vec<PipelineOutcome>,
    pub records: Vec<TradingRecord>,
}

fn record(ticker: &str, date: NaiveDate, label: Decision) -> TradingRecord {
    let (buy, sell, inst) = match label {
        Decision::Overweight => (2, 1, 1),
        Decision::Underweight => (1, 2, 1),
        Decision::Neutral => (0, 0, 0),
    };
    TradingRecord {
        ticker: ticker.to_string(),
        trade_date: date,
        total_buy_volume: buy,
        total_sell_volume: sell,
        institution_count: inst,
    }
}

/// HO log with `a_o` overweight decisions of which `m_o` match the label,
/// `a_u` underweight of which `m_u` match, plus `neutral` neutral decisions.
/// Every article has its own ticker and is labelled on the next trading day.
pub fn consistency_log(a_o: u64, m_o: u64, a_u: u64, m_u: u64, neutral: u64) -> Labelled {
    let mut rows: Vec<(Decision, Decision)> = Vec::new();
    for i in 0..a_o {
        rows.push((Decision::Overweight, if i < m_o { Decision::Overweight } else { Decision::Neutral }));
    }
    for i in 0..a_u {
        rows.push((Decision::Underweight, if i < m_u { Decision::Underweight } else { Decision::Overweight }));
    }
    for i in 0..neutral {
        rows.push((Decision::Neutral, if i % 2 == 0 { Decision::Neutral } else { Decision::Overweight }));
    }
    let mut out = Labelled { outcomes: Vec::new(), records: Vec::new() };
    for (i, (agent, label)) in rows.into_iter().enumerate() {
        let ticker = format!("C{i}");
        out.outcomes.push(bare(&format!("c{i}"), &ticker, &ho(), junior(), agent));
        out.records.push(record(&ticker, day(3), label));
    }
    out
}

/// Paired short-/long-term single-trader logs realising `cells[a][b]`.
pub fn paired_logs(cells: [[u64; 3]; 3]) -> (Vec<PipelineOutcome>, Vec<PipelineOutcome>) {
    let long = PromptVariant::new(Horizon::LongTerm, Seniority::Junior);
    let mut short_log = Vec::new();
    let mut long_log = Vec::new();
    let mut i = 0;
    for (a, row) in Decision::ALL.iter().zip(cells) {
        for (b, n) in Decision::ALL.iter().zip(row) {
            for _ in 0..n {
                let id = format!("p{i}");
                short_log.push(bare(&id, "2330", &single(), junior(), *a));
                long_log.push(bare(&id, "2330", &single(), long, *b));
                i += 1;
            }
        }
    }
    (short_log, long_log)
}

fn suggestion(action: AgentAction) -> TraderSuggestion {
    TraderSuggestion { action, thoughts: "t".into(), backend: BackendId::new("trader"), raw: String::new() }
}

/// An HO outcome where a long suggestion was shown to the head trader.
pub fn head_outcome(id: &str, variant: PromptVariant, verdict: Verdict) -> PipelineOutcome {
    let mut o = bare(id, "2330", &ho(), variant, Decision::Neutral);
    o.analyst_report = Some(AnalystReport { article_id: id.to_string(), text: "a".into() });
    o.trader_suggestions = vec![suggestion(AgentAction::Long)];
    o.head_presented = vec![0];
    o.head_verdict = Some(HeadTraderVerdict { verdict, thoughts: String::new(), raw: String::new() });
    o.final_decision = if verdict.is_approval() { Final::Overweight } else { Final::Neutral };
    o
}

/// HO outcome where the trader said neither, so no head trader ran.
pub fn uninvoked_outcome(id: &str, variant: PromptVariant) -> PipelineOutcome {
    let mut o = bare(id, "2330", &ho(), variant, Decision::Neutral);
    o.analyst_report = Some(AnalystReport { article_id: id.to_string(), text: "a".into() });
    o.trader_suggestions = vec![suggestion(AgentAction::Neither)];
    o
}

/// Junior and senior HO outcomes with `(approvals, invocations)` each, plus
/// `idle` uninvoked outcomes per seniority.
pub fn approval_log(junior_counts: (u64, u64), senior_counts: (u64, u64), idle: u64) -> Vec<PipelineOutcome> {
    let mut out = Vec::new();
    for (seniority, (yes, total)) in [(Seniority::Junior, junior_counts), (Seniority::Senior, senior_counts)] {
        let variant = PromptVariant::new(Horizon::ShortTerm, seniority);
        for i in 0..total {
            let verdict = if i < yes { Verdict::Follow } else { Verdict::NotFollow };
            out.push(head_outcome(&format!("h{i}"), variant, verdict));
        }
        for i in 0..idle {
            out.push(uninvoked_outcome(&format!("n{i}"), variant));
        }
    }
    out
}

pub struct Priced {
    pub outcomes: Vec<PipelineOutcome>,
    pub prices: Vec<PricePoint>,
}

/// `n` overweight HO junior decisions published on 2 Jan, each on its own
/// ticker; the close rises by t+1 for the first `up1` and by t+5 for the
/// first `up5`. Others alternate flat and down.
pub fn market_log(n: u64, up1: u64, up5: u64) -> Priced {
    let mut out = Priced { outcomes: Vec::new(), prices: Vec::new() };
    let t5 = calendar().next_trading_day(day(2), 5).unwrap();
    for i in 0..n {
        let ticker = format!("M{i}");
        out.outcomes.push(bare(&format!("m{i}"), &ticker, &ho(), junior(), Decision::Overweight));
        let miss = |k: u64| if k % 2 == 0 { 100.0 } else { 99.0 };
        let c1 = if i < up1 { 101.0 } else { miss(i) };
        let c5 = if i < up5 { 102.0 } else { miss(i + 1) };
        for (date, close) in [(day(2), 100.0), (day(3), c1), (t5, c5)] {
            out.prices.push(PricePoint { ticker: ticker.clone(), trade_date: date, close_price: close });
        }
    }
    out
}

pub fn write_records(path: &Path, records: &[TradingRecord]) {
    let mut s = String::from("date,ticker,total_buy,total_sell,institutions\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{}",
            r.trade_date, r.ticker, r.total_buy_volume, r.total_sell_volume, r.institution_count
        )
        .unwrap();
    }
    fs::write(path, s).unwrap();
}

pub fn write_prices(path: &Path, prices: &[PricePoint]) {
    let mut s = String::from("date,ticker,close\n");
    for p in prices {
        writeln!(s, "{},{},{}", p.trade_date, p.ticker, p.close_price).unwrap();
    }
    fs::write(path, s).unwrap();
}

pub fn write_calendar(path: &Path, calendar: &TradingCalendar) {
    let s: String = calendar.dates().iter().map(|d| format!("{d}\n")).collect();
    fs::write(path, s).unwrap();
}

pub fn write_log(path: &Path, outcomes: &[PipelineOutcome]) {
    let mut bytes = Vec::new();
    desksim::outcome_log::write_outcomes(&mut bytes, outcomes).unwrap();
    fs::write(path, bytes).unwrap();
}
