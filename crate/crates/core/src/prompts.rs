//! Prompt templates for each agent role and the two controlled wording
//! variants (decision horizon, trader seniority).
//!
//! Template bodies live in `templates/` as plain text so that wording
//! changes show up as reviewable diffs. Rendering applies the variant
//! substitutions to the body first and then interpolates the slots in a
//! single pass, so bound text is never re-scanned for placeholders or
//! variant words.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{Horizon, PromptVariant, Seniority};

/// Short-term objective block, replaced wholesale for long-term runs.
pub const SHORT_TERM_OBJECTIVE: &str = "Our objective is to capitalize on potential market movements \
within the upcoming week. To aid our decision, it's vital to gauge whether the recent news will \
significantly influence investor views and cause short-term price fluctuations.";

pub const LONG_TERM_OBJECTIVE: &str = "Our strategy is to hold the position for a year, considering \
long-term effects and potential price movements.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Analyst,
    TraderFromNews,
    TraderFromAnalysis,
    TraderFromBoth,
    HeadTrader,
    /// Head trader reviewing two suggestions (HOm).
    HeadTraderDual,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Analyst,
        Role::TraderFromNews,
        Role::TraderFromAnalysis,
        Role::TraderFromBoth,
        Role::HeadTrader,
        Role::HeadTraderDual,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Role::Analyst => "analyst.txt",
            Role::TraderFromNews => "trader_from_news.txt",
            Role::TraderFromAnalysis => "trader_from_analysis.txt",
            Role::TraderFromBoth => "trader_from_both.txt",
            Role::HeadTrader => "head_trader.txt",
            Role::HeadTraderDual => "head_trader_dual.txt",
        }
    }

    fn builtin_body(self) -> &'static str {
        match self {
            Role::Analyst => include_str!("../templates/analyst.txt"),
            Role::TraderFromNews => include_str!("../templates/trader_from_news.txt"),
            Role::TraderFromAnalysis => include_str!("../templates/trader_from_analysis.txt"),
            Role::TraderFromBoth => include_str!("../templates/trader_from_both.txt"),
            Role::HeadTrader => include_str!("../templates/head_trader.txt"),
            Role::HeadTraderDual => include_str!("../templates/head_trader_dual.txt"),
        }
    }

    pub fn is_trader(self) -> bool {
        matches!(self, Role::TraderFromNews | Role::TraderFromAnalysis | Role::TraderFromBoth)
    }

    pub fn is_head_trader(self) -> bool {
        matches!(self, Role::HeadTrader | Role::HeadTraderDual)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("role"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "Company")]
    Company,
    #[serde(rename = "News Title")]
    NewsTitle,
    #[serde(rename = "News Content")]
    NewsContent,
    #[serde(rename = "Analyst's Analysis")]
    AnalystAnalysis,
    #[serde(rename = "Trader's suggestion")]
    TraderSuggestion,
}

impl Slot {
    pub const ALL: [Slot; 5] =
        [Slot::Company, Slot::NewsTitle, Slot::NewsContent, Slot::AnalystAnalysis, Slot::TraderSuggestion];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Company => "Company",
            Slot::NewsTitle => "News Title",
            Slot::NewsContent => "News Content",
            Slot::AnalystAnalysis => "Analyst's Analysis",
            Slot::TraderSuggestion => "Trader's suggestion",
        }
    }

    pub fn placeholder(self) -> String {
        format!("{{{}}}", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("slot {{{0}}} is not bound")]
    MissingSlot(&'static str),
    #[error("template for {role} references unknown placeholder `{placeholder}`")]
    UnknownPlaceholder { role: Role, placeholder: String },
    #[error("template manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<Slot, String>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, slot: Slot, text: impl Into<String>) -> Self {
        self.0.insert(slot, text.into());
        self
    }

    pub fn set(&mut self, slot: Slot, text: impl Into<String>) {
        self.0.insert(slot, text.into());
    }

    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.0.get(&slot).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    role: Role,
    body: String,
}

impl PromptTemplate {
    /// Rejects bodies containing `{...}` spans that are not known slots.
    pub fn new(role: Role, body: impl Into<String>) -> Result<Self, PromptError> {
        let body = body.into();
        if let Some(placeholder) = unknown_placeholder(&body) {
            return Err(PromptError::UnknownPlaceholder { role, placeholder });
        }
        Ok(Self { role, body })
    }

    pub fn builtin(role: Role) -> Self {
        Self { role, body: role.builtin_body().to_string() }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.body.as_bytes()))
    }

    /// Slots referenced by the body, in first-occurrence order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut seen = Vec::new();
        for (_, slot) in scan_slots(&self.body) {
            if !seen.contains(&slot) {
                seen.push(slot);
            }
        }
        seen
    }

    /// Body with the variant's wording substitutions applied, slots untouched.
    pub fn apply_variant(&self, variant: PromptVariant) -> String {
        let mut body = self.body.clone();
        if variant.horizon == Horizon::LongTerm {
            body = body.replace(SHORT_TERM_OBJECTIVE, LONG_TERM_OBJECTIVE);
        }
        if variant.seniority == Seniority::Senior {
            body = body.replace("junior", "senior").replace("Junior", "Senior");
        }
        body
    }

    pub fn render(&self, variant: PromptVariant, bindings: &Bindings) -> Result<String, PromptError> {
        let body = self.apply_variant(variant);
        let mut out = String::with_capacity(body.len() + 1024);
        let mut cursor = 0;
        for (at, slot) in scan_slots(&body) {
            let text = bindings.get(slot).filter(|t| !t.is_empty()).ok_or(PromptError::MissingSlot(slot.name()))?;
            out.push_str(&body[cursor..at]);
            out.push_str(text);
            cursor = at + slot.name().len() + 2;
        }
        out.push_str(&body[cursor..]);
        Ok(out)
    }
}

pub fn render(template: &PromptTemplate, variant: PromptVariant, bindings: &Bindings) -> Result<String, PromptError> {
    template.render(variant, bindings)
}

/// Byte offsets of every slot placeholder in `body`.
fn scan_slots(body: &str) -> Vec<(usize, Slot)> {
    let mut found = Vec::new();
    for (at, _) in body.match_indices('{') {
        let rest = &body[at + 1..];
        if let Some(slot) =
            Slot::ALL.into_iter().find(|s| rest.starts_with(s.name()) && rest[s.name().len()..].starts_with('}'))
        {
            found.push((at, slot));
        }
    }
    found
}

fn unknown_placeholder(body: &str) -> Option<String> {
    let known: Vec<usize> = scan_slots(body).into_iter().map(|(at, _)| at).collect();
    body.match_indices('{').find(|(at, _)| !known.contains(at)).map(|(at, _)| {
        let end = body[at..].find('}').map_or(body.len(), |e| at + e + 1);
        body[at..end].to_string()
    })
}

#[derive(Debug, Clone, Deserialize)]
struct ManifestEntry {
    role: Role,
    file: String,
    slots: Vec<Slot>,
}

#[derive(Debug, Clone, Deserialize)]
struct Manifest {
    templates: Vec<ManifestEntry>,
}

/// One template per role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<Role, PromptTemplate>,
}

impl TemplateSet {
    pub const MANIFEST: &'static str = include_str!("../templates/manifest.json");

    pub fn builtin() -> Self {
        Self { templates: Role::ALL.into_iter().map(|r| (r, PromptTemplate::builtin(r))).collect() }
    }

    /// Loads a template directory laid out like `templates/`, checking each
    /// body against the slots its manifest entry declares.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let raw = fs::read_to_string(dir.join("manifest.json"))
            .map_err(|e| PromptError::Manifest(format!("{}: {e}", dir.display())))?;
        let manifest: Manifest = serde_json::from_str(&raw).map_err(|e| PromptError::Manifest(e.to_string()))?;
        let mut templates = BTreeMap::new();
        for entry in manifest.templates {
            let body = fs::read_to_string(dir.join(&entry.file))
                .map_err(|e| PromptError::Manifest(format!("{}: {e}", entry.file)))?;
            let template = PromptTemplate::new(entry.role, body)?;
            check_declared_slots(&template, &entry.slots)?;
            templates.insert(entry.role, template);
        }
        if let Some(missing) = Role::ALL.into_iter().find(|r| !templates.contains_key(r)) {
            return Err(PromptError::Manifest(format!("no template for role {missing}")));
        }
        Ok(Self { templates })
    }

    pub fn get(&self, role: Role) -> &PromptTemplate {
        &self.templates[&role]
    }

    pub fn digests(&self) -> BTreeMap<Role, String> {
        self.templates.iter().map(|(r, t)| (*r, t.digest())).collect()
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

fn check_declared_slots(template: &PromptTemplate, declared: &[Slot]) -> Result<(), PromptError> {
    let mut found = template.slots();
    let mut declared = declared.to_vec();
    found.sort();
    declared.sort();
    if found != declared {
        return Err(PromptError::Manifest(format!(
            "{} declares slots {declared:?} but body uses {found:?}",
            template.role()
        )));
    }
    Ok(())
}
