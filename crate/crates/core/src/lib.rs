//! Simulated trading-desk agents over financial news, and the measurements
//! used to compare their decisions with institutional flows and prices.

pub mod agency;
pub mod domain;
pub mod gateway;
pub mod market;
pub mod metrics;
pub mod outcome_log;
pub mod prompts;
pub mod report;
pub mod strategy;

pub use domain::{AgentAction, BackendId, Decision, Horizon, PromptVariant, Seniority, StrategyKind};
pub use strategy::{Engine, Final, PipelineOutcome};
