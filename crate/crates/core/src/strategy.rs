//! Composition of agent steps into the four communication strategies.
//!
//! Every strategy yields one [`PipelineOutcome`] per article and variant.
//! The head trader only filters: it can approve a suggested position or
//! drop it to neutral, never introduce one.

use std::thread;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agency::{
    AgentCall, Agents, AnalystReport, ArticleSkipped, HeadTraderVerdict, SkipCause, TraderInput, TraderSuggestion,
    Transcript, Verdict,
};
use crate::domain::{action_to_decision, BackendId, Decision, NewsArticle, PromptVariant, StrategyKind};
use crate::prompts::Role;

pub const OUTCOME_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Final {
    Overweight,
    Neutral,
    Underweight,
    Skipped,
}

impl Final {
    pub fn decision(self) -> Option<Decision> {
        match self {
            Final::Overweight => Some(Decision::Overweight),
            Final::Neutral => Some(Decision::Neutral),
            Final::Underweight => Some(Decision::Underweight),
            Final::Skipped => None,
        }
    }
}

impl From<Decision> for Final {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Overweight => Final::Overweight,
            Decision::Neutral => Final::Neutral,
            Decision::Underweight => Final::Underweight,
        }
    }
}

/// How the trader suggestions of an outcome came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionMode {
    /// Traders were called in this run.
    #[default]
    Live,
    /// Suggestions were frozen from an earlier log; only the head trader ran.
    Replayed,
}

/// Offset range of this outcome's calls in the run's transcript file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TranscriptRef {
    pub first: u64,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub schema_version: u32,
    pub article_id: String,
    pub ticker: String,
    pub published_at: NaiveDate,
    pub strategy: StrategyKind,
    pub variant: PromptVariant,
    #[serde(rename = "final")]
    pub final_decision: Final,
    #[serde(default)]
    pub mode: SuggestionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyst_report: Option<AnalystReport>,
    #[serde(default)]
    pub trader_suggestions: Vec<TraderSuggestion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_verdict: Option<HeadTraderVerdict>,
    /// Indices into `trader_suggestions` shown to the head trader, in
    /// presentation order (trader A first).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub head_presented: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<ArticleSkipped>,
    #[serde(default)]
    pub transcript_ref: TranscriptRef,
}

impl PipelineOutcome {
    /// An outcome with no stage results yet; its final is `Skipped` until a
    /// stage sets it.
    pub fn new(article: &NewsArticle, strategy: &StrategyKind, variant: PromptVariant) -> Self {
        Self {
            schema_version: OUTCOME_SCHEMA_VERSION,
            article_id: article.article_id.clone(),
            ticker: article.ticker.clone(),
            published_at: article.published_at,
            strategy: strategy.clone(),
            variant,
            final_decision: Final::Skipped,
            mode: SuggestionMode::Live,
            analyst_report: None,
            trader_suggestions: Vec::new(),
            head_verdict: None,
            head_presented: Vec::new(),
            skipped: None,
            transcript_ref: TranscriptRef::default(),
        }
    }

    fn skip(mut self, why: ArticleSkipped) -> Self {
        self.final_decision = Final::Skipped;
        self.skipped = Some(why);
        self
    }

    pub fn decision(&self) -> Option<Decision> {
        self.final_decision.decision()
    }

    /// Decision of the trader a head-trader verdict endorsed, if any.
    pub fn followed_decision(&self) -> Option<Decision> {
        let verdict = self.head_verdict.as_ref()?.verdict;
        let slot = match verdict {
            Verdict::NotFollow => return None,
            Verdict::Follow | Verdict::FollowTraderA => 0,
            Verdict::FollowTraderB => 1,
        };
        let idx = *self.head_presented.get(slot)?;
        self.trader_suggestions.get(idx).map(|s| action_to_decision(s.action))
    }

    /// Checks the composition invariants; returns a description of the
    /// first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let has_analyst = self.analyst_report.is_some();
        let has_head = self.head_verdict.is_some();
        let actionable = self.trader_suggestions.iter().any(|s| s.action.is_actionable());
        let skipped = self.final_decision == Final::Skipped;
        match &self.strategy {
            StrategyKind::SingleTrader { .. } if has_analyst || has_head => {
                return Err("single trader must not carry analyst report or head verdict".into())
            }
            StrategyKind::CoT { .. } if has_head => return Err("CoT must not carry a head verdict".into()),
            StrategyKind::CoT { .. } | StrategyKind::HO { .. } | StrategyKind::HOm { .. }
                if !skipped && !has_analyst =>
            {
                return Err("analyst report missing".into())
            }
            StrategyKind::HO { .. } | StrategyKind::HOm { .. } if !skipped && has_head != actionable => {
                return Err(format!("head verdict present={has_head} but actionable suggestion={actionable}"))
            }
            _ => {}
        }
        if skipped != self.skipped.is_some() {
            return Err("skip reason must accompany a skipped final".into());
        }
        if let Some(decision) = self.decision() {
            let proposed: Vec<Decision> =
                self.trader_suggestions.iter().map(|s| action_to_decision(s.action)).collect();
            if decision != Decision::Neutral && !proposed.contains(&decision) {
                return Err(format!("final {decision} was never proposed by a trader"));
            }
            if let Some(followed) = self.followed_decision() {
                if followed != decision {
                    return Err(format!("head followed {followed} but final is {decision}"));
                }
            }
            if self.head_verdict.as_ref().is_some_and(|v| v.verdict == Verdict::NotFollow)
                && decision != Decision::Neutral
            {
                return Err("NotFollow must yield neutral".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("outcome {0} has no head-trader stage to replay")]
    NotHierarchical(String),
    #[error("outcome {0} carries no trader suggestions")]
    MissingSuggestions(String),
    #[error("outcome {0} carries no analyst report")]
    MissingAnalysis(String),
}

/// Final decision implied by a head-trader verdict over the presented
/// suggestions.
pub fn resolve_verdict(suggestions: &[TraderSuggestion], presented: &[usize], verdict: Verdict) -> Decision {
    let pick = |slot: usize| {
        presented
            .get(slot)
            .and_then(|i| suggestions.get(*i))
            .map_or(Decision::Neutral, |s| action_to_decision(s.action))
    };
    match verdict {
        Verdict::NotFollow => Decision::Neutral,
        Verdict::Follow | Verdict::FollowTraderA => pick(0),
        Verdict::FollowTraderB => pick(1),
    }
}

pub struct Engine<'a> {
    agents: Agents<'a>,
    trader_input: TraderInput,
}

impl<'a> Engine<'a> {
    pub fn new(agents: Agents<'a>) -> Self {
        Self { agents, trader_input: TraderInput::NewsAndAnalysis }
    }

    /// Trader template used by CoT/HO/HOm; the single-trader strategy always
    /// reads the news directly.
    pub fn with_trader_input(mut self, input: TraderInput) -> Self {
        if input != TraderInput::News {
            self.trader_input = input;
        }
        self
    }

    pub fn run(
        &self,
        strategy: &StrategyKind,
        article: &NewsArticle,
        variant: PromptVariant,
    ) -> (PipelineOutcome, Transcript) {
        match strategy {
            StrategyKind::SingleTrader { trader } => self.run_single_trader(article, variant, trader),
            StrategyKind::CoT { analyst, trader } => self.run_cot(article, variant, trader, analyst),
            StrategyKind::HO { analyst, trader, head } => self.run_ho(article, variant, trader, head, analyst),
            StrategyKind::HOm { analyst, trader_a, trader_b, head } => {
                self.run_hom(article, variant, trader_a, trader_b, head, analyst)
            }
        }
    }

    pub fn run_single_trader(
        &self,
        article: &NewsArticle,
        variant: PromptVariant,
        trader: &BackendId,
    ) -> (PipelineOutcome, Transcript) {
        let strategy = StrategyKind::SingleTrader { trader: trader.clone() };
        let mut outcome = PipelineOutcome::new(article, &strategy, variant);
        let mut transcript = Transcript::new();
        match self.agents.run_trader(article, None, TraderInput::News, variant, trader, &mut transcript) {
            Ok(s) => {
                outcome.final_decision = action_to_decision(s.action).into();
                outcome.trader_suggestions.push(s);
            }
            Err(why) => outcome = outcome.skip(why),
        }
        (outcome, transcript)
    }

    pub fn run_cot(
        &self,
        article: &NewsArticle,
        variant: PromptVariant,
        trader: &BackendId,
        analyst: &BackendId,
    ) -> (PipelineOutcome, Transcript) {
        let strategy = StrategyKind::CoT { analyst: analyst.clone(), trader: trader.clone() };
        let mut outcome = PipelineOutcome::new(article, &strategy, variant);
        let mut transcript = Transcript::new();
        let report = match self.agents.run_analyst(article, analyst, &mut transcript) {
            Ok(r) => r,
            Err(why) => return (outcome.skip(why), transcript),
        };
        let step = self.agents.run_trader(article, Some(&report), self.trader_input, variant, trader, &mut transcript);
        outcome.analyst_report = Some(report);
        match step {
            Ok(s) => {
                outcome.final_decision = action_to_decision(s.action).into();
                outcome.trader_suggestions.push(s);
            }
            Err(why) => outcome = outcome.skip(why),
        }
        (outcome, transcript)
    }

    pub fn run_ho(
        &self,
        article: &NewsArticle,
        variant: PromptVariant,
        trader: &BackendId,
        head: &BackendId,
        analyst: &BackendId,
    ) -> (PipelineOutcome, Transcript) {
        let strategy = StrategyKind::HO { analyst: analyst.clone(), trader: trader.clone(), head: head.clone() };
        let mut outcome = PipelineOutcome::new(article, &strategy, variant);
        let mut transcript = Transcript::new();
        let report = match self.agents.run_analyst(article, analyst, &mut transcript) {
            Ok(r) => r,
            Err(why) => return (outcome.skip(why), transcript),
        };
        let step = self.agents.run_trader(article, Some(&report), self.trader_input, variant, trader, &mut transcript);
        outcome.analyst_report = Some(report);
        match step {
            Ok(s) => outcome.trader_suggestions.push(s),
            Err(why) => return (outcome.skip(why), transcript),
        }
        let outcome = self.head_stage(outcome, article, variant, head, &mut transcript);
        (outcome, transcript)
    }

    pub fn run_hom(
        &self,
        article: &NewsArticle,
        variant: PromptVariant,
        trader_a: &BackendId,
        trader_b: &BackendId,
        head: &BackendId,
        analyst: &BackendId,
    ) -> (PipelineOutcome, Transcript) {
        let strategy = StrategyKind::HOm {
            analyst: analyst.clone(),
            trader_a: trader_a.clone(),
            trader_b: trader_b.clone(),
            head: head.clone(),
        };
        let mut outcome = PipelineOutcome::new(article, &strategy, variant);
        let mut transcript = Transcript::new();
        if let Err(e) = strategy.validate() {
            return (
                outcome
                    .skip(ArticleSkipped { role: Role::TraderFromBoth, cause: SkipCause::InvalidInput(e.to_string()) }),
                transcript,
            );
        }
        let report = match self.agents.run_analyst(article, analyst, &mut transcript) {
            Ok(r) => r,
            Err(why) => return (outcome.skip(why), transcript),
        };
        let input = self.trader_input;
        let run = |backend: &BackendId| {
            let mut log: Vec<AgentCall> = Vec::new();
            let res = self.agents.run_trader(article, Some(&report), input, variant, backend, &mut log);
            (res, log)
        };
        let ((res_a, log_a), (res_b, log_b)) = thread::scope(|s| {
            let run = &run;
            let b = s.spawn(move || run(trader_b));
            let a = run(trader_a);
            (a, b.join().expect("trader thread panicked"))
        });
        transcript.extend(log_a);
        transcript.extend(log_b);
        outcome.analyst_report = Some(report);
        match (res_a, res_b) {
            (Ok(a), Ok(b)) => outcome.trader_suggestions.extend([a, b]),
            (Err(why), _) | (_, Err(why)) => return (outcome.skip(why), transcript),
        }
        let outcome = self.head_stage(outcome, article, variant, head, &mut transcript);
        (outcome, transcript)
    }

    /// Shows the actionable suggestions to the head trader and resolves the
    /// final decision. With none actionable the head trader is not called.
    fn head_stage(
        &self,
        mut outcome: PipelineOutcome,
        article: &NewsArticle,
        variant: PromptVariant,
        head: &BackendId,
        transcript: &mut Transcript,
    ) -> PipelineOutcome {
        let presented: Vec<usize> = outcome
            .trader_suggestions
            .iter()
            .enumerate()
            .filter(|(_, s)| s.action.is_actionable())
            .map(|(i, _)| i)
            .collect();
        if presented.is_empty() {
            outcome.final_decision = Final::Neutral;
            return outcome;
        }
        let Some(report) = outcome.analyst_report.as_ref() else {
            return outcome.skip(ArticleSkipped {
                role: if presented.len() > 1 { Role::HeadTraderDual } else { Role::HeadTrader },
                cause: SkipCause::InvalidInput("no analyst report for the head trader".into()),
            });
        };
        let shown: Vec<&TraderSuggestion> = presented.iter().map(|i| &outcome.trader_suggestions[*i]).collect();
        match self.agents.run_head_trader(article, report, &shown, variant, head, transcript) {
            Ok(verdict) => {
                outcome.final_decision =
                    resolve_verdict(&outcome.trader_suggestions, &presented, verdict.verdict).into();
                outcome.head_verdict = Some(verdict);
                outcome.head_presented = presented;
                outcome
            }
            Err(why) => outcome.skip(why),
        }
    }

    /// Re-runs only the head-trader stage of an HO/HOm outcome against its
    /// frozen analyst report and trader suggestions.
    pub fn replay_head(
        &self,
        source: &PipelineOutcome,
        article: &NewsArticle,
        variant: PromptVariant,
    ) -> Result<(PipelineOutcome, Transcript), ReplayError> {
        let head = match &source.strategy {
            StrategyKind::HO { head, .. } | StrategyKind::HOm { head, .. } => head.clone(),
            _ => return Err(ReplayError::NotHierarchical(source.article_id.clone())),
        };
        if source.trader_suggestions.is_empty() {
            return Err(ReplayError::MissingSuggestions(source.article_id.clone()));
        }
        let report =
            source.analyst_report.clone().ok_or_else(|| ReplayError::MissingAnalysis(source.article_id.clone()))?;
        let mut outcome = PipelineOutcome::new(article, &source.strategy, variant);
        outcome.mode = SuggestionMode::Replayed;
        outcome.analyst_report = Some(report);
        outcome.trader_suggestions = source.trader_suggestions.clone();
        let mut transcript = Transcript::new();
        let outcome = self.head_stage(outcome, article, variant, &head, &mut transcript);
        Ok((outcome, transcript))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AgentAction, Horizon, Seniority};
    use crate::gateway::{Gateway, Sampling, Script};
    use crate::prompts::TemplateSet;

    fn article() -> NewsArticle {
        NewsArticle {
            article_id: "a1".into(),
            ticker: "2330".into(),
            published_at: NaiveDate::from_ymd_opt(2024, 1, 2).unwrap(),
            title: "Title".into(),
            content: "Content".into(),
            source: "test".into(),
        }
    }

    struct Fixture {
        gateway: Gateway,
        templates: TemplateSet,
    }

    impl Fixture {
        fn new(trader: &str, head: &str) -> Self {
            let mut gateway = Gateway::in_memory();
            gateway.register_scripted("analyst", Script::new().otherwise("some scenarios"));
            gateway.register_scripted("trader", Script::new().otherwise(trader));
            gateway.register_scripted("head", Script::new().otherwise(head));
            gateway.register_scripted("broken", Script::new());
            Self { gateway, templates: TemplateSet::builtin() }
        }

        fn engine(&self) -> Engine<'_> {
            Engine::new(Agents::new(&self.gateway, &self.templates, Sampling::default()))
        }
    }

    fn ids() -> (BackendId, BackendId, BackendId) {
        ("trader".into(), "head".into(), "analyst".into())
    }

    #[test]
    fn single_trader_composition() {
        for (reply, expected) in
            [("[Action]: long", Final::Overweight), ("[Action]: neither", Final::Neutral), ("hmm", Final::Skipped)]
        {
            let fx = Fixture::new(reply, "");
            let (out, _) = fx.engine().run_single_trader(&article(), PromptVariant::default(), &"trader".into());
            assert_eq!(out.final_decision, expected);
            assert!(out.analyst_report.is_none());
            out.check_invariants().unwrap();
        }
    }

    #[test]
    fn cot_runs_analyst_then_trader() {
        let fx = Fixture::new("[Action]: short", "");
        let (t, _, a) = ids();
        let (out, log) = fx.engine().run_cot(&article(), PromptVariant::default(), &t, &a);
        assert_eq!(out.final_decision, Final::Underweight);
        assert!(out.analyst_report.is_some());
        assert_eq!(log.len(), 2);
        assert!(log[1].prompt.contains("some scenarios"));
    }

    #[test]
    fn cot_analyst_failure_short_circuits() {
        let fx = Fixture::new("[Action]: short", "");
        let (out, log) = fx.engine().run_cot(&article(), PromptVariant::default(), &"trader".into(), &"broken".into());
        assert_eq!(out.final_decision, Final::Skipped);
        assert_eq!(log.len(), 1);
        out.check_invariants().unwrap();
    }

    #[test]
    fn single_and_cot_prompts_differ() {
        let fx = Fixture::new("[Action]: long", "");
        let (t, _, a) = ids();
        fx.engine().run_single_trader(&article(), PromptVariant::default(), &t);
        fx.engine().run_cot(&article(), PromptVariant::default(), &t, &a);
        // single trader prompt, analyst prompt, cot trader prompt
        assert_eq!(fx.gateway.store().len(), 3);
    }

    #[test]
    fn ho_follow_and_not_follow() {
        let (t, h, a) = ids();
        let fx = Fixture::new("[Action]: long", "[Action]: Follow");
        let (out, _) = fx.engine().run_ho(&article(), PromptVariant::default(), &t, &h, &a);
        assert_eq!(out.final_decision, Final::Overweight);
        out.check_invariants().unwrap();

        let fx = Fixture::new("[Action]: long", "[Action]: Not Follow\n[Thoughts]: thin");
        let (out, _) = fx.engine().run_ho(&article(), PromptVariant::default(), &t, &h, &a);
        assert_eq!(out.final_decision, Final::Neutral);
        out.check_invariants().unwrap();
    }

    #[test]
    fn ho_neither_skips_head_trader() {
        let (t, h, a) = ids();
        let fx = Fixture::new("[Action]: neither", "[Action]: Follow");
        let (out, log) = fx.engine().run_ho(&article(), PromptVariant::default(), &t, &h, &a);
        assert_eq!(out.final_decision, Final::Neutral);
        assert!(out.head_verdict.is_none());
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn hom_dual_and_degenerate_cases() {
        let mut gateway = Gateway::in_memory();
        gateway.register_scripted("analyst", Script::new().otherwise("scenarios"));
        gateway.register_scripted("ta", Script::new().otherwise("[Action]: long"));
        gateway.register_scripted("tb", Script::new().otherwise("[Action]: short"));
        gateway.register_scripted("tn", Script::new().otherwise("[Action]: neither"));
        gateway.register_scripted(
            "head",
            Script::new().when_contains("Trader B:", "[Action]: Follow Trader B").otherwise("[Action]: Follow"),
        );
        let templates = TemplateSet::builtin();
        let engine = Engine::new(Agents::new(&gateway, &templates, Sampling::default()));
        let v = PromptVariant::default();
        let (h, a) = (BackendId::new("head"), BackendId::new("analyst"));

        let (out, _) = engine.run_hom(&article(), v, &"ta".into(), &"tb".into(), &h, &a);
        assert_eq!(out.final_decision, Final::Underweight);
        assert_eq!(out.head_presented, vec![0, 1]);
        out.check_invariants().unwrap();

        let (out, _) = engine.run_hom(&article(), v, &"tn".into(), &"tb".into(), &h, &a);
        assert_eq!(out.final_decision, Final::Underweight);
        assert_eq!(out.head_presented, vec![1]);
        assert_eq!(out.head_verdict.as_ref().unwrap().verdict, Verdict::Follow);
        out.check_invariants().unwrap();

        let mut gateway2 = Gateway::in_memory();
        gateway2.register_scripted("analyst", Script::new().otherwise("scenarios"));
        gateway2.register_scripted("n1", Script::new().otherwise("[Action]: neither"));
        gateway2.register_scripted("n2", Script::new().otherwise("[Action]: Neither"));
        let engine = Engine::new(Agents::new(&gateway2, &templates, Sampling::default()));
        let (out, log) = engine.run_hom(&article(), v, &"n1".into(), &"n2".into(), &h, &a);
        assert_eq!(out.final_decision, Final::Neutral);
        assert!(out.head_verdict.is_none());
        assert_eq!(log.len(), 3);
    }

    #[test]
    fn hom_same_traders_rejected() {
        let fx = Fixture::new("[Action]: long", "[Action]: Follow");
        let (t, h, a) = ids();
        let (out, log) = fx.engine().run_hom(&article(), PromptVariant::default(), &t, &t, &h, &a);
        assert_eq!(out.final_decision, Final::Skipped);
        assert!(log.is_empty());
    }

    #[test]
    fn replay_changes_only_head_stage() {
        let mut gateway = Gateway::in_memory();
        gateway.register_scripted("analyst", Script::new().otherwise("scenarios"));
        gateway.register_scripted("trader", Script::new().otherwise("[Action]: long\n[Thoughts]: strong"));
        gateway.register_scripted(
            "head",
            Script::new()
                .when_contains("junior trader's suggestion", "[Action]: Not Follow")
                .when_contains("senior trader's suggestion", "[Action]: Follow"),
        );
        let templates = TemplateSet::builtin();
        let engine = Engine::new(Agents::new(&gateway, &templates, Sampling::default()));
        let (t, h, a) = ids();
        let (source, _) = engine.run_ho(&article(), PromptVariant::default(), &t, &h, &a);
        assert_eq!(source.final_decision, Final::Neutral);

        let senior = PromptVariant::new(Horizon::ShortTerm, Seniority::Senior);
        let (replayed, log) = engine.replay_head(&source, &article(), senior).unwrap();
        assert_eq!(replayed.final_decision, Final::Overweight);
        assert_eq!(replayed.mode, SuggestionMode::Replayed);
        assert_eq!(replayed.trader_suggestions, source.trader_suggestions);
        assert_eq!(log.len(), 1);

        let (single, _) = engine.run_single_trader(&article(), PromptVariant::default(), &t);
        assert!(matches!(engine.replay_head(&single, &article(), senior), Err(ReplayError::NotHierarchical(_))));
    }

    #[test]
    fn resolve_verdict_only_filters() {
        let mk = |action| TraderSuggestion { action, thoughts: String::new(), backend: "x".into(), raw: String::new() };
        let s = vec![mk(AgentAction::Long), mk(AgentAction::Short)];
        assert_eq!(resolve_verdict(&s, &[0, 1], Verdict::FollowTraderA), Decision::Overweight);
        assert_eq!(resolve_verdict(&s, &[0, 1], Verdict::FollowTraderB), Decision::Underweight);
        assert_eq!(resolve_verdict(&s, &[0, 1], Verdict::NotFollow), Decision::Neutral);
        assert_eq!(resolve_verdict(&s, &[1], Verdict::Follow), Decision::Underweight);
    }

    #[test]
    fn outcome_serializes_with_final_field() {
        let fx = Fixture::new("[Action]: long", "[Action]: Follow");
        let (t, h, a) = ids();
        let (out, _) = fx.engine().run_ho(&article(), PromptVariant::default(), &t, &h, &a);
        let json = serde_json::to_string(&out).unwrap();
        assert!(json.contains("\"final\":\"overweight\""));
        assert!(json.contains("\"schema_version\":1"));
        let back: PipelineOutcome = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out);
    }
}
