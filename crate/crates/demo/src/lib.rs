//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export has a plain-Rust twin returning `Result<String, String>` so
//! the logic is testable without a browser.

use desksim::agency::{parse_head_trader_reply, parse_trader_reply, HeadContext};
use desksim::domain::{Decision, Horizon, PromptVariant, Seniority};
use desksim::metrics::{consistency, CrossTab, LabelGap, LabeledDecision};
use desksim::prompts::{Bindings, Role, Slot, TemplateSet};
use desksim::report::{consistency_table, crosstab_table};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn role(name: &str) -> Result<Role, String> {
    serde_json::from_value(json!(name)).map_err(|_| format!("unknown role `{name}`"))
}

pub fn render_prompt_text(
    role_name: &str,
    horizon: &str,
    seniority: &str,
    fields: &[String],
) -> Result<String, String> {
    let variant = PromptVariant::new(horizon.parse::<Horizon>()?, seniority.parse::<Seniority>()?);
    let mut bindings = Bindings::new();
    for (slot, text) in Slot::ALL.into_iter().zip(fields) {
        bindings.set(slot, text.clone());
    }
    let templates = TemplateSet::builtin();
    templates.get(role(role_name)?).render(variant, &bindings).map_err(|e| e.to_string())
}

/// `kind` is `trader`, `head` or `head-dual`; the result is a JSON object.
pub fn parse_reply_json(kind: &str, raw: &str) -> Result<String, String> {
    let value = match kind {
        "trader" => match parse_trader_reply(raw) {
            Ok((action, thoughts)) => json!({"action": action, "thoughts": thoughts}),
            Err(e) => json!({"error": e.to_string()}),
        },
        "head" | "head-dual" => {
            let ctx = if kind == "head" { HeadContext::Single } else { HeadContext::Dual };
            match parse_head_trader_reply(raw, ctx) {
                Ok(v) => {
                    json!({"verdict": v.verdict.to_string(), "approval": v.verdict.is_approval(), "thoughts": v.thoughts})
                }
                Err(e) => json!({"error": e.to_string()}),
            }
        }
        other => return Err(format!("unknown reply kind `{other}`")),
    };
    Ok(value.to_string())
}

fn decision(word: &str) -> Result<Option<Decision>, String> {
    match word.trim().to_ascii_lowercase().as_str() {
        "overweight" | "o" | "long" => Ok(Some(Decision::Overweight)),
        "neutral" | "n" | "neither" => Ok(Some(Decision::Neutral)),
        "underweight" | "u" | "short" => Ok(Some(Decision::Underweight)),
        "skip" | "skipped" | "-" => Ok(None),
        other => Err(format!("unknown decision `{other}`")),
    }
}

type Pair = (Option<Decision>, Option<Decision>);

fn pairs(text: &str) -> Result<Vec<Pair>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let (a, b) = l.split_once(',').ok_or_else(|| format!("line {}: expected `left,right`", i + 1))?;
            let at = |e: String| format!("line {}: {e}", i + 1);
            Ok((decision(a).map_err(at)?, decision(b).map_err(at)?))
        })
        .collect()
}

/// Lines of `agent,label`; a skipped label counts as missing.
pub fn consistency_text(text: &str) -> Result<String, String> {
    let rows =
        pairs(text)?.into_iter().map(|(agent, label)| LabeledDecision { agent, label: label.ok_or(LabelGap::Missing) });
    Ok(consistency_table(&[("input".into(), consistency(rows))]).render_text())
}

/// Lines of `left,right` decisions for the same article.
pub fn crosstab_text(text: &str) -> Result<String, String> {
    let mut tab = CrossTab::default();
    for (a, b) in pairs(text)? {
        match (a, b) {
            (Some(a), Some(b)) => tab.add(a, b),
            _ => tab.skipped_pairs += 1,
        }
    }
    Ok(crosstab_table("Paired decisions", "left", "right", &tab).render_text())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn render_prompt(
    role: &str,
    horizon: &str,
    seniority: &str,
    company: &str,
    title: &str,
    content: &str,
    analysis: &str,
    suggestion: &str,
) -> Result<String, JsError> {
    let fields = [company, title, content, analysis, suggestion].map(str::to_string);
    render_prompt_text(role, horizon, seniority, &fields).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn parse_reply(kind: &str, raw: &str) -> Result<String, JsError> {
    parse_reply_json(kind, raw).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn score(mode: &str, text: &str) -> Result<String, JsError> {
    let out = match mode {
        "consistency" => consistency_text(text),
        "crosstab" => crosstab_text(text),
        other => Err(format!("unknown scoring mode `{other}`")),
    };
    out.map_err(|e| JsError::new(&e))
}
