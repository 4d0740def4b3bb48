//! Single agent steps (analyst, trader, head trader) and the grammar that
//! turns free-text replies into structured verdicts.
//!
//! Parsing never defaults: a reply without a recognised action is an error
//! and the article is skipped, which keeps parse failures out of the
//! neutral category.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AgentAction, BackendId, NewsArticle, PromptVariant};
use crate::gateway::{CacheKey, CompletionRequest, Gateway, GatewayError, Sampling};
use crate::prompts::{Bindings, PromptError, Role, Slot, TemplateSet};

const ACTION_MARKER: &str = "[action]";
const THOUGHTS_MARKER: &str = "[thoughts]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalystReport {
    pub article_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraderSuggestion {
    pub action: AgentAction,
    pub thoughts: String,
    pub backend: BackendId,
    pub raw: String,
}

impl TraderSuggestion {
    /// The suggestion as shown to the head trader, in the trader's own
    /// response template.
    pub fn render(&self) -> String {
        render_trader_reply(self.action.token(), &self.thoughts)
    }
}

/// Trader response template filled in with an action token.
pub fn render_trader_reply(action_token: &str, thoughts: &str) -> String {
    if thoughts.is_empty() {
        format!("[Action]: {action_token}")
    } else {
        format!("[Action]: {action_token}\n[Thoughts]: {thoughts}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Follow,
    NotFollow,
    FollowTraderA,
    FollowTraderB,
}

impl Verdict {
    pub fn is_approval(self) -> bool {
        self != Verdict::NotFollow
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Follow => "Follow",
            Verdict::NotFollow => "Not Follow",
            Verdict::FollowTraderA => "Follow Trader A",
            Verdict::FollowTraderB => "Follow Trader B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadTraderVerdict {
    pub verdict: Verdict,
    pub thoughts: String,
    pub raw: String,
}

/// Whether the head trader reviewed one suggestion or two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadContext {
    Single,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ParseError {
    #[error("no recognised action after [Action] marker")]
    UnparsableAction,
    #[error("no recognised head-trader verdict after [Action] marker")]
    UnparsableVerdict,
}

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    let n = needle.len();
    hay.as_bytes().windows(n).position(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

fn after_marker<'a>(raw: &'a str, marker: &str) -> Option<&'a str> {
    find_ci(raw, marker).map(|at| &raw[at + marker.len()..])
}

fn thoughts_of(raw: &str) -> String {
    after_marker(raw, THOUGHTS_MARKER)
        .map(|t| t.trim_start_matches(|c: char| c.is_whitespace() || c == ':').trim_end().to_string())
        .unwrap_or_default()
}

/// Extracts the action token following the first `[Action]` marker
/// (case-insensitive, tolerant of quotes and punctuation) and the text
/// after the first `[Thoughts]` marker.
pub fn parse_trader_reply(raw: &str) -> Result<(AgentAction, String), ParseError> {
    let after = after_marker(raw, ACTION_MARKER).ok_or(ParseError::UnparsableAction)?;
    let start = after.find(|c: char| c.is_alphanumeric() || c == '[').ok_or(ParseError::UnparsableAction)?;
    let rest = &after[start..];
    let word_len = rest.find(|c: char| !c.is_alphanumeric()).unwrap_or(rest.len());
    let action = match rest[..word_len].to_ascii_lowercase().as_str() {
        "long" => AgentAction::Long,
        "short" => AgentAction::Short,
        "neither" => AgentAction::Neither,
        _ => return Err(ParseError::UnparsableAction),
    };
    Ok((action, thoughts_of(raw)))
}

/// Words of the verdict phrase: the first non-empty line after the
/// `[Action]` marker, cut at any `[Thoughts]` marker, lowercased, with
/// punctuation treated as whitespace.
fn verdict_words(raw: &str) -> Option<Vec<String>> {
    let mut after = after_marker(raw, ACTION_MARKER)?;
    if let Some(cut) = find_ci(after, THOUGHTS_MARKER) {
        after = &after[..cut];
    }
    let line = after
        .lines()
        .map(|l| l.trim_start_matches(|c: char| c.is_whitespace() || c == ':'))
        .find(|l| l.chars().any(char::is_alphanumeric))?;
    let words: Vec<String> =
        line.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_ascii_lowercase).collect();
    Some(words)
}

pub fn parse_head_trader_reply(raw: &str, context: HeadContext) -> Result<HeadTraderVerdict, ParseError> {
    let words = verdict_words(raw).ok_or(ParseError::UnparsableVerdict)?;
    let w: Vec<&str> = words.iter().map(String::as_str).collect();
    // "not follow" must be tested before "follow"
    let verdict = match (context, w.as_slice()) {
        (_, ["not", "follow", ..]) => Verdict::NotFollow,
        (HeadContext::Single, ["follow", ..]) => Verdict::Follow,
        (HeadContext::Dual, ["follow", "trader", "a", ..] | ["follow", "a", ..]) => Verdict::FollowTraderA,
        (HeadContext::Dual, ["follow", "trader", "b", ..] | ["follow", "b", ..]) => Verdict::FollowTraderB,
        _ => return Err(ParseError::UnparsableVerdict),
    };
    Ok(HeadTraderVerdict { verdict, thoughts: thoughts_of(raw), raw: raw.to_string() })
}

/// Which trader template a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraderInput {
    News,
    Analysis,
    #[default]
    NewsAndAnalysis,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum SkipCause {
    #[error("gateway: {0}")]
    Gateway(String),
    #[error("empty response")]
    EmptyResponse,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("prompt: {0}")]
    Prompt(String),
    #[error("invalid step input: {0}")]
    InvalidInput(String),
}

impl From<GatewayError> for SkipCause {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::EmptyResponse { .. } => SkipCause::EmptyResponse,
            other => SkipCause::Gateway(other.to_string()),
        }
    }
}

impl From<PromptError> for SkipCause {
    fn from(e: PromptError) -> Self {
        SkipCause::Prompt(e.to_string())
    }
}

/// An agent step failed; the article is excluded from every denominator.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("article skipped at {role}: {cause}")]
pub struct ArticleSkipped {
    pub role: Role,
    pub cause: SkipCause,
}

/// One persisted agent call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCall {
    pub article_id: String,
    pub role: Role,
    pub backend: BackendId,
    pub cache_key: Option<CacheKey>,
    pub cache_hit: bool,
    pub prompt: String,
    pub raw: Option<String>,
    pub parsed: Option<String>,
    pub error: Option<String>,
}

pub type Transcript = Vec<AgentCall>;

#[derive(Clone)]
pub struct Agents<'a> {
    gateway: &'a Gateway,
    templates: &'a TemplateSet,
    sampling: Sampling,
}

impl<'a> Agents<'a> {
    pub fn new(gateway: &'a Gateway, templates: &'a TemplateSet, sampling: Sampling) -> Self {
        Self { gateway, templates, sampling }
    }

    pub fn gateway(&self) -> &Gateway {
        self.gateway
    }

    fn news_bindings(article: &NewsArticle) -> Bindings {
        Bindings::new()
            .bind(Slot::Company, article.ticker.clone())
            .bind(Slot::NewsTitle, article.title.clone())
            .bind(Slot::NewsContent, article.content.clone())
    }

    /// Renders, calls the gateway and parses, recording the call.
    #[allow(clippy::too_many_arguments)]
    fn step<T>(
        &self,
        article: &NewsArticle,
        role: Role,
        variant: PromptVariant,
        bindings: &Bindings,
        backend: &BackendId,
        transcript: &mut Transcript,
        parse: impl FnOnce(&str) -> Result<(T, String), SkipCause>,
    ) -> Result<T, ArticleSkipped> {
        let skipped = |cause: SkipCause| ArticleSkipped { role, cause };
        let prompt = self.templates.get(role).render(variant, bindings).map_err(|e| skipped(e.into()))?;
        let mut call = AgentCall {
            article_id: article.article_id.clone(),
            role,
            backend: backend.clone(),
            cache_key: None,
            cache_hit: false,
            prompt,
            raw: None,
            parsed: None,
            error: None,
        };
        let req = CompletionRequest::new(backend.clone(), call.prompt.clone()).with_sampling(self.sampling);
        let response = self.gateway.complete(&req);
        let result = response.map_err(SkipCause::from).and_then(|resp| {
            call.cache_key = Some(resp.key.clone());
            call.cache_hit = resp.cache_hit;
            call.raw = Some(resp.text.to_string());
            parse(&resp.text)
        });
        let result = match result {
            Ok((value, summary)) => {
                call.parsed = Some(summary);
                Ok(value)
            }
            Err(cause) => {
                call.error = Some(cause.to_string());
                Err(skipped(cause))
            }
        };
        transcript.push(call);
        result
    }

    pub fn run_analyst(
        &self,
        article: &NewsArticle,
        backend: &BackendId,
        transcript: &mut Transcript,
    ) -> Result<AnalystReport, ArticleSkipped> {
        let bindings = Self::news_bindings(article);
        self.step(article, Role::Analyst, PromptVariant::default(), &bindings, backend, transcript, |raw: &str| {
            let report = AnalystReport { article_id: article.article_id.clone(), text: raw.to_string() };
            Ok((report, format!("{} bytes", raw.len())))
        })
    }

    pub fn run_trader(
        &self,
        article: &NewsArticle,
        analysis: Option<&AnalystReport>,
        input: TraderInput,
        variant: PromptVariant,
        backend: &BackendId,
        transcript: &mut Transcript,
    ) -> Result<TraderSuggestion, ArticleSkipped> {
        let role = match (input, analysis) {
            (TraderInput::News, _) => Role::TraderFromNews,
            (TraderInput::Analysis, Some(_)) => Role::TraderFromAnalysis,
            (TraderInput::NewsAndAnalysis, Some(_)) => Role::TraderFromBoth,
            (_, None) => {
                return Err(ArticleSkipped {
                    role: Role::TraderFromBoth,
                    cause: SkipCause::InvalidInput("trader input needs an analyst report".into()),
                })
            }
        };
        let mut bindings = Self::news_bindings(article);
        if let Some(report) = analysis {
            bindings.set(Slot::AnalystAnalysis, report.text.clone());
        }
        self.step(article, role, variant, &bindings, backend, transcript, |raw: &str| {
            let (action, thoughts) = parse_trader_reply(raw)?;
            let suggestion = TraderSuggestion { action, thoughts, backend: backend.clone(), raw: raw.to_string() };
            Ok((suggestion, action.token().to_string()))
        })
    }

    /// Asks the head trader to review one or two actionable suggestions.
    pub fn run_head_trader(
        &self,
        article: &NewsArticle,
        analysis: &AnalystReport,
        suggestions: &[&TraderSuggestion],
        variant: PromptVariant,
        backend: &BackendId,
        transcript: &mut Transcript,
    ) -> Result<HeadTraderVerdict, ArticleSkipped> {
        let invalid =
            |msg: &str| ArticleSkipped { role: Role::HeadTrader, cause: SkipCause::InvalidInput(msg.to_string()) };
        if suggestions.iter().any(|s| !s.action.is_actionable()) {
            return Err(invalid("head trader only reviews long/short suggestions"));
        }
        let (role, context, shown) = match suggestions {
            [one] => (Role::HeadTrader, HeadContext::Single, one.render()),
            [a, b] => (
                Role::HeadTraderDual,
                HeadContext::Dual,
                format!("Trader A:\n{}\n\nTrader B:\n{}", a.render(), b.render()),
            ),
            _ => return Err(invalid("head trader reviews one or two suggestions")),
        };
        let bindings = Self::news_bindings(article)
            .bind(Slot::AnalystAnalysis, analysis.text.clone())
            .bind(Slot::TraderSuggestion, shown);
        self.step(article, role, variant, &bindings, backend, transcript, |raw: &str| {
            let verdict = parse_head_trader_reply(raw, context)?;
            let summary = verdict.verdict.to_string();
            Ok((verdict, summary))
        })
    }
}
