//! Analysis reports to a generic table model, and tables to text.
//!
//! Two tables summarize a set of reports: the ignored elements (concepts a
//! transformation never reads or never writes) and the referenced elements
//! (referenced concepts grouped by their copy/mutation profile). Tables render
//! to Markdown, HTML, LaTeX and JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyzer::{AnalysisReport, ModeSet};

pub const ALL_OTHER: &str = "ALL OTHER";
pub const NONE: &str = "NONE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, header: Vec<String>) -> Self {
        Table {
            title: title.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row arity must match the header");
        self.rows.push(row);
    }

    pub fn is_well_formed(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.header.len())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables always serialize")
    }

    pub fn from_json(text: &str) -> Result<Table, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Markdown,
    Html,
    Latex,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "html" => Ok(Format::Html),
            "latex" | "tex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected markdown, html, latex or json)")),
        }
    }
}

/// Referenced concepts of one transformation sharing a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileGroup {
    pub copy_modes: ModeSet,
    pub mutation_modes: ModeSet,
    /// Declaration order.
    pub concepts: Vec<String>,
    pub rendered_label: String,
}

impl ProfileGroup {
    pub fn key(&self) -> (ModeSet, ModeSet) {
        (self.copy_modes, self.mutation_modes)
    }
}

fn group_label(copy: ModeSet, mutation: ModeSet) -> String {
    format!("copy: {} / mutation: {}", copy.label(), mutation.label())
}

/// Groups the refined domain of `report` by (copy modes, mutation modes).
/// Ignored-in concepts are not referenced and belong to no group.
pub fn profile_groups(report: &AnalysisReport) -> Vec<ProfileGroup> {
    let mut groups: Vec<ProfileGroup> = Vec::new();
    for p in report.profiles.values() {
        if !report.refined_domain.contains(&p.concept) {
            continue;
        }
        match groups
            .iter_mut()
            .find(|g| g.copy_modes == p.copy_modes && g.mutation_modes == p.mutation_modes)
        {
            Some(g) => g.concepts.push(p.concept.clone()),
            None => groups.push(ProfileGroup {
                copy_modes: p.copy_modes,
                mutation_modes: p.mutation_modes,
                concepts: vec![p.concept.clone()],
                rendered_label: group_label(p.copy_modes, p.mutation_modes),
            }),
        }
    }
    groups
}

/// The group rendered as "ALL OTHER": the unique largest one.
pub fn all_other_group(groups: &[ProfileGroup]) -> Option<usize> {
    let largest = groups.iter().map(|g| g.concepts.len()).max()?;
    let mut at = groups.iter().enumerate().filter(|(_, g)| g.concepts.len() == largest);
    let (index, _) = at.next()?;
    if at.next().is_some() {
        None
    } else {
        Some(index)
    }
}

/// Transformation | Ignored in metaelements | Ignored out metaelements.
pub fn ignored_table<'a>(reports: impl IntoIterator<Item = &'a AnalysisReport>) -> Table {
    let mut table = Table::new(
        "Ignored elements",
        vec![
            "Transformation".to_string(),
            "Ignored in metaelements".to_string(),
            "Ignored out metaelements".to_string(),
        ],
    );
    for r in reports {
        table.push_row(vec![
            r.transformation.clone(),
            r.ignored_in.in_order(&r.source_concepts).join(", "),
            r.ignored_out.in_order(&r.target_concepts).join(", "),
        ]);
    }
    table
}

/// One column per distinct (copy, mutation) profile across `reports`.
///
/// The header row carries the copy labels and the first body row the
/// mutation labels; one row per transformation follows.
pub fn referenced_table<'a>(reports: impl IntoIterator<Item = &'a AnalysisReport>) -> Table {
    let reports: Vec<&AnalysisReport> = reports.into_iter().collect();
    let per_report: Vec<Vec<ProfileGroup>> = reports.iter().map(|r| profile_groups(r)).collect();

    let mut columns: Vec<(ModeSet, ModeSet)> = Vec::new();
    for g in per_report.iter().flatten() {
        if !columns.contains(&g.key()) {
            columns.push(g.key());
        }
    }
    columns.sort_by(|a, b| {
        (a.0.len(), a.0.label(), a.1.label()).cmp(&(b.0.len(), b.0.label(), b.1.label()))
    });

    let mut header = vec!["Copy".to_string()];
    header.extend(columns.iter().map(|c| c.0.label()));
    let mut table = Table::new("Referenced elements", header);
    let mut mutation_row = vec!["Mutation".to_string()];
    mutation_row.extend(columns.iter().map(|c| c.1.label()));
    table.push_row(mutation_row);

    for (report, groups) in reports.iter().zip(&per_report) {
        let all_other = all_other_group(groups);
        let mut row = vec![report.transformation.clone()];
        for key in &columns {
            let cell = match groups.iter().position(|g| g.key() == *key) {
                Some(i) if Some(i) == all_other => ALL_OTHER.to_string(),
                Some(i) => groups[i].concepts.join(", "),
                None => NONE.to_string(),
            };
            row.push(cell);
        }
        table.push_row(row);
    }
    table
}

/// Transformation | Refined domain | Refined codomain | Fixed-point candidate.
pub fn summary_table<'a>(reports: impl IntoIterator<Item = &'a AnalysisReport>) -> Table {
    let mut table = Table::new(
        "Transformation summary",
        vec![
            "Transformation".to_string(),
            "Refined domain".to_string(),
            "Refined codomain".to_string(),
            "Fixed-point candidate".to_string(),
        ],
    );
    for r in reports {
        let verdict = if r.fixed_point.candidate { "yes" } else { "no" };
        table.push_row(vec![
            r.transformation.clone(),
            r.refined_domain.in_order(&r.source_concepts).join(", "),
            r.refined_codomain.in_order(&r.target_concepts).join(", "),
            format!("{verdict}: {}", r.fixed_point.explanation),
        ]);
    }
    table
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Markdown => render_markdown(table),
        Format::Html => render_html(table),
        Format::Latex => render_latex(table),
        Format::Json => table.to_json() + "\n",
    }
}

/// Several tables as one document: titled Markdown sections, one HTML page,
/// consecutive LaTeX table environments, or a JSON array of tables.
pub fn render_document(tables: &[Table], format: Format) -> String {
    match format {
        Format::Markdown => tables
            .iter()
            .map(|t| format!("## {}\n\n{}", t.title, render_markdown(t)))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Html => {
            let mut out = String::from("<!DOCTYPE html>\n<html>\n<body>\n");
            for t in tables {
                out.push_str(&render_html(t));
            }
            out.push_str("</body>\n</html>\n");
            out
        }
        Format::Latex => tables.iter().map(render_latex).collect::<Vec<_>>().join("\n"),
        Format::Json => serde_json::to_string_pretty(tables).expect("tables always serialize") + "\n",
    }
}

fn markdown_cell(text: &str) -> String {
    text.replace('|', "\\|")
}

fn render_markdown(table: &Table) -> String {
    let line = |cells: &[String]| {
        let cells: Vec<String> = cells.iter().map(|c| markdown_cell(c)).collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let mut out = line(&table.header);
    out.push_str(&format!("|{}\n", " --- |".repeat(table.header.len())));
    for row in &table.rows {
        out.push_str(&line(row));
    }
    out
}

fn html_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn render_html(table: &Table) -> String {
    let mut out = String::from("<table border=\"1\">\n");
    if !table.title.is_empty() {
        let _ = writeln!(out, "  <caption>{}</caption>", html_escape(&table.title));
    }
    out.push_str("  <thead>\n    <tr>");
    for h in &table.header {
        let _ = write!(out, "<th>{}</th>", html_escape(h));
    }
    out.push_str("</tr>\n  </thead>\n  <tbody>\n");
    for row in &table.rows {
        out.push_str("    <tr>");
        for c in row {
            let _ = write!(out, "<td>{}</td>", html_escape(c));
        }
        out.push_str("</tr>\n");
    }
    out.push_str("  </tbody>\n</table>\n");
    out
}

fn latex_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            _ => out.push(c),
        }
    }
    out
}

fn render_latex(table: &Table) -> String {
    let spec = format!("|{}", "c|".repeat(table.header.len().max(1)));
    let line = |cells: &[String]| {
        cells.iter().map(|c| latex_escape(c)).collect::<Vec<_>>().join("&") + "\\\\\n"
    };
    let mut out = String::from("\\begin{table}\n\\centering\n");
    if !table.title.is_empty() {
        let _ = writeln!(out, "\\caption{{{}}}", latex_escape(&table.title));
    }
    let _ = writeln!(out, "\\begin{{tabular}}{{{spec}}}");
    out.push_str("\\hline\n");
    out.push_str(&line(&table.header));
    out.push_str("\\hline\n");
    for row in &table.rows {
        out.push_str(&line(row));
        out.push_str("\\hline\n");
    }
    out.push_str("\\end{tabular}\n\\end{table}\n");
    out
}

/// The analysis-report JSON document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub transformation: String,
    pub source_mm: String,
    pub target_mm: String,
    pub ignored_in: Vec<String>,
    pub ignored_out: Vec<String>,
    pub refined_domain: Vec<String>,
    pub refined_codomain: Vec<String>,
    pub fixed_point_candidate: bool,
    pub profiles: Vec<ProfileDocument>,
    pub diagnostics: Vec<DiagnosticDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub concept: String,
    pub copy_modes: Vec<String>,
    pub mutation_modes: Vec<String>,
    pub produced_as: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticDocument {
    pub kind: String,
    pub subject: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ReportDocument {
    pub fn from_report(r: &AnalysisReport) -> Self {
        let modes = |m: ModeSet| m.iter().map(|m| m.as_str().to_string()).collect();
        ReportDocument {
            transformation: r.transformation.clone(),
            source_mm: r.source_mm.clone(),
            target_mm: r.target_mm.clone(),
            ignored_in: r.ignored_in.in_order(&r.source_concepts),
            ignored_out: r.ignored_out.in_order(&r.target_concepts),
            refined_domain: r.refined_domain.in_order(&r.source_concepts),
            refined_codomain: r.refined_codomain.in_order(&r.target_concepts),
            fixed_point_candidate: r.fixed_point.candidate,
            profiles: r
                .profiles
                .values()
                .map(|p| ProfileDocument {
                    concept: p.concept.clone(),
                    copy_modes: modes(p.copy_modes),
                    mutation_modes: modes(p.mutation_modes),
                    produced_as: {
                        let set: crate::concepts::ConceptSet = p.produced_as.iter().cloned().collect();
                        set.in_order(&r.target_concepts)
                    },
                })
                .collect(),
            diagnostics: r
                .diagnostics
                .iter()
                .map(|d| {
                    let loc = d.location.as_ref();
                    let positioned = loc.filter(|l| l.line > 0);
                    DiagnosticDocument {
                        kind: d.kind.as_str().to_string(),
                        subject: d.subject.clone(),
                        message: d.message.clone(),
                        file: loc.and_then(|l| l.file.clone()),
                        line: positioned.map(|l| l.line),
                        column: positioned.map(|l| l.column),
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// JSON array of report documents.
pub fn reports_to_json<'a>(reports: impl IntoIterator<Item = &'a AnalysisReport>) -> String {
    let docs: Vec<ReportDocument> = reports.into_iter().map(ReportDocument::from_report).collect();
    serde_json::to_string_pretty(&docs).expect("reports always serialize") + "\n"
}
