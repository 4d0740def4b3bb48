//! Tabular reports in plain text and JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Decision, Seniority};
use crate::metrics::{ConsistencyReport, CrossTab, DecisionStats, MarketConsistency, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Decisions,
    Consistency,
    Crosstab,
    Approval,
    Market,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::Decisions,
        ReportKind::Consistency,
        ReportKind::Crosstab,
        ReportKind::Approval,
        ReportKind::Market,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Decisions => "decisions",
            ReportKind::Consistency => "consistency",
            ReportKind::Crosstab => "crosstab",
            ReportKind::Approval => "approval",
            ReportKind::Market => "market",
        }
    }
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown report kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cell {
    Ratio { num: u64, den: u64, value: Option<f64> },
    Count { value: u64 },
    Text { value: String },
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Ratio { num, den, .. } => Ratio::new(*num, *den).to_string(),
            Cell::Count { value } => value.to_string(),
            Cell::Text { value } => value.clone(),
        }
    }
}

impl From<Ratio> for Cell {
    fn from(r: Ratio) -> Self {
        Cell::Ratio { num: r.num, den: r.den, value: r.value() }
    }
}

impl From<u64> for Cell {
    fn from(value: u64) -> Self {
        Cell::Count { value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len() + 1, self.columns.len());
        self.rows.push(Row { label: label.into(), cells });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn render_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = vec![self.columns.clone()];
        for r in &self.rows {
            let mut line = vec![r.label.clone()];
            line.extend(r.cells.iter().map(Cell::render));
            grid.push(line);
        }
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| grid.iter().map(|line| line[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("{}\n", self.title);
        for (i, line) in grid.iter().enumerate() {
            let mut text = String::new();
            for (c, cell) in line.iter().enumerate() {
                let pad = widths[c] - cell.chars().count();
                if c == 0 {
                    text.push_str(cell);
                    text.push_str(&" ".repeat(pad));
                } else {
                    text.push_str("  ");
                    text.push_str(&" ".repeat(pad));
                    text.push_str(cell);
                }
            }
            out.push_str(text.trim_end());
            out.push('\n');
            if i == 0 {
                let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(rule));
                out.push('\n');
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "* {n}");
        }
        out
    }
}

/// Provenance written at the top of every report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub manifest_digest: Option<String>,
    /// `(path, sha256)` of each outcome log read.
    pub logs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ReportKind,
    pub stamp: Stamp,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = format!("report: {}\n", self.kind.as_str());
        if let Some(d) = &self.stamp.manifest_digest {
            let _ = writeln!(out, "manifest: {d}");
        }
        for (path, digest) in &self.stamp.logs {
            let _ = writeln!(out, "log: {path} {digest}");
        }
        for t in &self.tables {
            out.push('\n');
            out.push_str(&t.render_text());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn decisions_table(rows: &[(String, DecisionStats)]) -> Table {
    let mut t =
        Table::new("Decision distribution", &["source", "overweight", "neutral", "underweight", "n", "skipped"]);
    for (label, s) in rows {
        let mut cells: Vec<Cell> = Decision::ALL.iter().map(|d| s.share(*d).into()).collect();
        cells.push(s.total().into());
        cells.push(s.skipped.into());
        t.row(label, cells);
    }
    t
}

pub fn consistency_table(rows: &[(String, ConsistencyReport)]) -> Table {
    let mut t = Table::new(
        "Consistency with institution labels",
        &["strategy", "overall", "overweight", "underweight", "neutral", "skipped", "no label", "tied label"],
    );
    for (label, r) in rows {
        let e = &r.excluded;
        t.row(
            label,
            vec![
                r.overall.into(),
                r.overweight.into(),
                r.underweight.into(),
                e.neutral.into(),
                e.skipped.into(),
                e.missing_label.into(),
                e.ambiguous_label.into(),
            ],
        );
    }
    t
}

/// Joint distribution with row and column marginals; rows follow the first
/// log, columns the second.
pub fn crosstab_table(title: &str, rows_axis: &str, cols_axis: &str, tab: &CrossTab) -> Table {
    let head = format!("{rows_axis} \\ {cols_axis}");
    let mut t = Table::new(title, &[&head, "overweight", "neutral", "underweight", "total"]);
    for a in Decision::ALL {
        let mut cells: Vec<Cell> = Decision::ALL.iter().map(|b| tab.joint(a, *b).into()).collect();
        cells.push(tab.row_marginal(a).into());
        t.row(a.as_str(), cells);
    }
    let mut totals: Vec<Cell> = Decision::ALL.iter().map(|b| tab.col_marginal(*b).into()).collect();
    totals.push(Ratio::new(tab.total(), tab.total()).into());
    t.row("total", totals);
    t.note(format!("pairs: {}, skipped pairs: {}", tab.total(), tab.skipped_pairs));
    t
}

pub fn approval_table(rows: &[(String, BTreeMap<Seniority, Ratio>)]) -> Table {
    let mut t = Table::new(
        "Head trader approval by trader seniority",
        &["strategy", "seniority", "approval rate", "invocations"],
    );
    for (label, by) in rows {
        for (seniority, r) in by {
            t.row(label, vec![Cell::Text { value: seniority.to_string() }, (*r).into(), r.den.into()]);
        }
    }
    t
}

pub fn market_table(rows: &[(String, MarketConsistency)], horizons: &[usize]) -> Table {
    let mut cols: Vec<String> = vec!["source".into()];
    for h in horizons {
        cols.push(format!("overweight t+{h}"));
        cols.push(format!("underweight t+{h}"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("Alignment with forward price moves", &col_refs);
    let mut missing = Vec::new();
    for (label, m) in rows {
        let mut cells = Vec::new();
        for h in horizons {
            let a = m.at(*h);
            cells.push(a.overweight.into());
            cells.push(a.underweight.into());
            missing.push(format!("{label} t+{h}: {}", a.missing_price));
        }
        t.row(label, cells);
    }
    if !missing.is_empty() {
        t.note(format!("missing prices: {}", missing.join(", ")));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_layout() {
        let stats = DecisionStats { counts: [1, 2, 1], skipped: 0 };
        let t = decisions_table(&[("HO".into(), stats)]);
        let text = t.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Decision distribution");
        assert!(lines[1].starts_with("source"));
        assert!(lines[2].chars().all(|c| c == '-'));
        assert!(lines[3].starts_with("HO"));
        assert!(lines[3].contains("25.00%"));
        assert!(lines[3].contains("50.00%"));
    }

    #[test]
    fn undefined_cells_print_dash() {
        let t = consistency_table(&[("CoT".into(), ConsistencyReport::default())]);
        assert!(t.render_text().contains('—'));
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains(r#""value":null"#));
    }

    #[test]
    fn report_kind_round_trip() {
        for k in ReportKind::ALL {
            assert_eq!(k.as_str().parse::<ReportKind>(), Ok(k));
        }
    }
}
