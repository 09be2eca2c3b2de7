//! Abstraction of transformation rules into per-concept profiles.
//!
//! Each rule is classified along two axes. The action is a *copy* when the
//! first target pattern has the source pattern's type and a *mutation*
//! otherwise. The mode is *lazily* for lazy rules, *conditionally* for guarded
//! rules and *always* for the rest. Profiles aggregate those pairs per source
//! concept. The ignored-in/out sets and the refined domain and codomain follow
//! from which concepts the transformation mentions at all.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::concepts::ConceptSet;
use crate::metamodel::{concrete_concepts, Metamodel};
use crate::syntax::Position;
use crate::tdsl::{ConceptRef, Rule, Transformation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Always,
    Conditionally,
    Lazily,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Always, Mode::Conditionally, Mode::Lazily];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Always => "always",
            Mode::Conditionally => "conditionally",
            Mode::Lazily => "lazily",
        }
    }

    /// Short form used in table headers.
    pub fn abbreviation(self) -> &'static str {
        match self {
            Mode::Always => "always",
            Mode::Conditionally => "cond.",
            Mode::Lazily => "lazily",
        }
    }

    pub fn parse(text: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == text)
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A subset of {always, conditionally, lazily}.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);

    pub fn of(modes: &[Mode]) -> Self {
        let mut set = ModeSet::EMPTY;
        for &m in modes {
            set.insert(m);
        }
        set
    }

    pub fn insert(&mut self, mode: Mode) {
        self.0 |= mode.bit();
    }

    pub fn contains(self, mode: Mode) -> bool {
        self.0 & mode.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Mode> {
        Mode::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Header label: modes joined by ", " as lazily, cond., always; "never" when empty.
    pub fn label(self) -> String {
        if self.is_empty() {
            return "never".to_string();
        }
        [Mode::Lazily, Mode::Conditionally, Mode::Always]
            .into_iter()
            .filter(|m| self.contains(*m))
            .map(Mode::abbreviation)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl FromIterator<Mode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = Mode>>(iter: I) -> Self {
        let mut set = ModeSet::EMPTY;
        for m in iter {
            set.insert(m);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Copy,
    Mutation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleClassification {
    pub rule: String,
    pub action: Action,
    pub mode: Mode,
    pub source: String,
    /// Target pattern concepts in pattern order, without repeats.
    pub targets: Vec<String>,
}

/// Classifies one rule against the metamodels it reads and writes.
///
/// Fails with the references that do not resolve when the source pattern or
/// any target pattern names a concept missing from its metamodel.
pub fn classify_rule(
    rule: &Rule,
    source_mm: &Metamodel,
    target_mm: &Metamodel,
) -> Result<RuleClassification, Vec<ConceptRef>> {
    let mut unresolved = Vec::new();
    let src = &rule.source_concept.name;
    if src.metamodel != source_mm.name() || !source_mm.contains(&src.concept) {
        unresolved.push(rule.source_concept.clone());
    }
    for t in &rule.targets {
        let name = &t.concept.name;
        if name.metamodel != target_mm.name() || !target_mm.contains(&name.concept) {
            unresolved.push(t.concept.clone());
        }
    }
    if !unresolved.is_empty() {
        return Err(unresolved);
    }

    let first = &rule.targets[0].concept.name;
    let action = if *first == rule.source_concept.name {
        Action::Copy
    } else {
        Action::Mutation
    };
    let mode = if rule.lazy {
        Mode::Lazily
    } else if rule.guard.is_some() {
        Mode::Conditionally
    } else {
        Mode::Always
    };
    let mut targets: Vec<String> = Vec::with_capacity(rule.targets.len());
    for t in &rule.targets {
        if !targets.contains(&t.concept.name.concept) {
            targets.push(t.concept.name.concept.clone());
        }
    }
    Ok(RuleClassification {
        rule: rule.name.clone(),
        action,
        mode,
        source: src.concept.clone(),
        targets,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptProfile {
    pub concept: String,
    pub copy_modes: ModeSet,
    pub mutation_modes: ModeSet,
    /// Every target of a mutation from this concept, plus the non-first
    /// targets of copies.
    pub produced_as: BTreeSet<String>,
}

impl ConceptProfile {
    fn empty(concept: &str) -> Self {
        ConceptProfile {
            concept: concept.to_string(),
            copy_modes: ModeSet::EMPTY,
            mutation_modes: ModeSet::EMPTY,
            produced_as: BTreeSet::new(),
        }
    }

    pub fn is_unprocessed(&self) -> bool {
        self.copy_modes.is_empty() && self.mutation_modes.is_empty()
    }

    fn absorb(&mut self, class: &RuleClassification) {
        match class.action {
            Action::Copy => {
                self.copy_modes.insert(class.mode);
                self.produced_as.extend(class.targets.iter().skip(1).cloned());
            }
            Action::Mutation => {
                self.mutation_modes.insert(class.mode);
                self.produced_as.extend(class.targets.iter().cloned());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LintKind {
    UnknownConcept,
    NeverProcessed,
    IgnoredIn,
    IgnoredOut,
}

impl LintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LintKind::UnknownConcept => "unknown_concept",
            LintKind::NeverProcessed => "never_processed",
            LintKind::IgnoredIn => "ignored_in",
            LintKind::IgnoredOut => "ignored_out",
        }
    }

    pub fn parse(text: &str) -> Option<LintKind> {
        [
            LintKind::UnknownConcept,
            LintKind::NeverProcessed,
            LintKind::IgnoredIn,
            LintKind::IgnoredOut,
        ]
        .into_iter()
        .find(|k| k.as_str() == text)
    }

    /// Only unresolved names are errors; the rest are findings for a human.
    pub fn is_error(self) -> bool {
        self == LintKind::UnknownConcept
    }
}

impl fmt::Display for LintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (Some(file), 0) => f.write_str(file),
            (Some(file), _) => write!(f, "{file}:{}:{}", self.line, self.column),
            (None, _) => write!(f, "{}:{}", self.line, self.column),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lint {
    pub kind: LintKind,
    pub subject: String,
    pub location: Option<Location>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointVerdict {
    pub candidate: bool,
    /// Concepts both conditionally mutated and conditionally or lazily copied.
    pub focal: Vec<String>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("transformation `{transformation}` declares {side} metamodel `{declared}` but `{supplied}` was supplied")]
    MetamodelMismatch {
        transformation: String,
        side: &'static str,
        declared: String,
        supplied: String,
    },
    #[error("fixed-point detection needs an endogenous transformation; `{0}` maps between different metamodels")]
    Exogenous(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub transformation: String,
    pub source_mm: String,
    pub target_mm: String,
    /// Concrete source concepts, declaration order.
    pub source_concepts: Vec<String>,
    /// Concrete target concepts, declaration order.
    pub target_concepts: Vec<String>,
    /// Keyed by exactly `source_concepts`, same order.
    pub profiles: IndexMap<String, ConceptProfile>,
    /// Classifications of the rules that resolved, in rule order.
    pub rules: Vec<RuleClassification>,
    pub ignored_in: ConceptSet,
    pub ignored_out: ConceptSet,
    pub refined_domain: ConceptSet,
    pub refined_codomain: ConceptSet,
    pub fixed_point: FixedPointVerdict,
    pub diagnostics: Vec<Lint>,
}

impl AnalysisReport {
    pub fn profile(&self, concept: &str) -> Option<&ConceptProfile> {
        self.profiles.get(concept)
    }

    pub fn is_endogenous(&self) -> bool {
        self.source_mm == self.target_mm
    }

    pub fn fixed_point_candidate(&self) -> bool {
        self.fixed_point.candidate
    }
}

/// Analyzes `t`, reading `source_mm` and writing `target_mm`.
pub fn analyze(
    t: &Transformation,
    source_mm: &Metamodel,
    target_mm: &Metamodel,
) -> Result<AnalysisReport, AnalysisError> {
    check_header(t, source_mm, target_mm)?;

    let source_concepts = concrete_concepts(source_mm);
    let target_concepts = concrete_concepts(target_mm);

    let resolves = |r: &ConceptRef| {
        (r.name.metamodel == source_mm.name() && source_mm.contains(&r.name.concept))
            || (r.name.metamodel == target_mm.name() && target_mm.contains(&r.name.concept))
    };
    let is_source_side =
        |r: &ConceptRef| r.name.metamodel == source_mm.name() && source_mm.contains(&r.name.concept);

    // Source-side mentions: source patterns, guards, bindings, helper bodies.
    let mut mentioned: HashMap<&str, Position> = HashMap::new();
    let mut unknown: Vec<&ConceptRef> = Vec::new();

    for h in &t.helpers {
        for r in h.context.iter() {
            if !resolves(r) {
                unknown.push(r);
            }
        }
        for r in &h.body.references {
            if is_source_side(r) {
                note(r, &mut mentioned);
            } else if !resolves(r) {
                unknown.push(r);
            }
        }
    }

    let mut produced: ConceptSet = ConceptSet::new();
    let mut rules = Vec::new();
    for rule in &t.rules {
        let src = &rule.source_concept;
        if is_source_side(src) {
            note(src, &mut mentioned);
        }
        for tp in &rule.targets {
            let name = &tp.concept.name;
            if name.metamodel == target_mm.name() && target_mm.contains(&name.concept) {
                produced.insert(name.concept.clone());
            }
        }
        for e in rule.expressions() {
            for r in &e.references {
                if is_source_side(r) {
                    note(r, &mut mentioned);
                } else if !resolves(r) {
                    unknown.push(r);
                }
            }
        }
        match classify_rule(rule, source_mm, target_mm) {
            Ok(class) => rules.push(class),
            Err(bad) => {
                // Pattern references are only reported here, so each occurrence lints once.
                unknown.extend(
                    std::iter::once(&rule.source_concept)
                        .chain(rule.targets.iter().map(|tp| &tp.concept))
                        .filter(|r| bad.contains(r)),
                );
            }
        }
    }

    let mut profiles: IndexMap<String, ConceptProfile> = source_concepts
        .iter()
        .map(|c| (c.clone(), ConceptProfile::empty(c)))
        .collect();
    for class in &rules {
        if let Some(p) = profiles.get_mut(&class.source) {
            p.absorb(class);
        }
    }

    let ignored_in: ConceptSet = source_concepts
        .iter()
        .filter(|c| !mentioned.contains_key(c.as_str()))
        .cloned()
        .collect();
    let ignored_out: ConceptSet = target_concepts
        .iter()
        .filter(|c| !produced.contains(c))
        .cloned()
        .collect();
    let refined_domain: ConceptSet = source_concepts
        .iter()
        .filter(|c| !ignored_in.contains(c))
        .cloned()
        .collect();
    let refined_codomain: ConceptSet = target_concepts
        .iter()
        .filter(|c| !ignored_out.contains(c))
        .cloned()
        .collect();

    let mut report = AnalysisReport {
        transformation: t.name.clone(),
        source_mm: source_mm.name().to_string(),
        target_mm: target_mm.name().to_string(),
        source_concepts,
        target_concepts,
        profiles,
        rules,
        ignored_in,
        ignored_out,
        refined_domain,
        refined_codomain,
        fixed_point: FixedPointVerdict {
            candidate: false,
            focal: Vec::new(),
            explanation: String::new(),
        },
        diagnostics: Vec::new(),
    };

    report.fixed_point = detect_fixed_point(&report).unwrap_or_else(|e| FixedPointVerdict {
        candidate: false,
        focal: Vec::new(),
        explanation: e.to_string(),
    });

    unknown.sort_by_key(|r| r.position);
    report.diagnostics = build_lints(t, &report, &unknown, &mentioned);
    Ok(report)
}

fn note<'a>(r: &'a ConceptRef, mentioned: &mut HashMap<&'a str, Position>) {
    let pos = mentioned.entry(r.name.concept.as_str()).or_insert(r.position);
    if r.position < *pos {
        *pos = r.position;
    }
}

fn check_header(
    t: &Transformation,
    source_mm: &Metamodel,
    target_mm: &Metamodel,
) -> Result<(), AnalysisError> {
    if t.source_metamodel != source_mm.name() {
        return Err(AnalysisError::MetamodelMismatch {
            transformation: t.name.clone(),
            side: "source",
            declared: t.source_metamodel.clone(),
            supplied: source_mm.name().to_string(),
        });
    }
    if t.target_metamodel != target_mm.name() {
        return Err(AnalysisError::MetamodelMismatch {
            transformation: t.name.clone(),
            side: "target",
            declared: t.target_metamodel.clone(),
            supplied: target_mm.name().to_string(),
        });
    }
    Ok(())
}

/// Fixed-point pattern: the refined codomain equals the refined domain, a few
/// focal concepts are conditionally mutated while also copied conditionally or
/// lazily, and nothing else is mutated.
pub fn detect_fixed_point(report: &AnalysisReport) -> Result<FixedPointVerdict, AnalysisError> {
    if !report.is_endogenous() {
        return Err(AnalysisError::Exogenous(report.transformation.clone()));
    }

    let focal: Vec<String> = report
        .profiles
        .values()
        .filter(|p| {
            p.mutation_modes.contains(Mode::Conditionally)
                && (p.copy_modes.contains(Mode::Conditionally) || p.copy_modes.contains(Mode::Lazily))
        })
        .map(|p| p.concept.clone())
        .collect();

    if report.refined_domain != report.refined_codomain {
        let only_in = report.refined_domain.difference(&report.refined_codomain);
        let only_out = report.refined_codomain.difference(&report.refined_domain);
        let mut detail = Vec::new();
        if !only_in.is_empty() {
            detail.push(format!(
                "consumed but never produced: {}",
                only_in.in_order(&report.source_concepts).join(", ")
            ));
        }
        if !only_out.is_empty() {
            detail.push(format!(
                "produced but never consumed: {}",
                only_out.in_order(&report.target_concepts).join(", ")
            ));
        }
        return Ok(FixedPointVerdict {
            candidate: false,
            focal,
            explanation: format!(
                "refined domain and refined codomain differ ({})",
                detail.join("; ")
            ),
        });
    }

    if focal.is_empty() {
        return Ok(FixedPointVerdict {
            candidate: false,
            focal,
            explanation: "no concept is both conditionally mutated and conditionally or lazily copied"
                .to_string(),
        });
    }

    let stray: Vec<&str> = report
        .profiles
        .values()
        .filter(|p| !p.mutation_modes.is_empty() && !focal.contains(&p.concept))
        .map(|p| p.concept.as_str())
        .collect();
    if !stray.is_empty() {
        return Ok(FixedPointVerdict {
            candidate: false,
            focal,
            explanation: format!(
                "concepts outside the focal set are mutated: {}",
                stray.join(", ")
            ),
        });
    }

    let explanation = format!(
        "refined domain equals refined codomain; focal concepts {} are conditionally mutated and otherwise copied; all other concepts are only copied",
        focal.join(", ")
    );
    Ok(FixedPointVerdict {
        candidate: true,
        focal,
        explanation,
    })
}

/// Diagnostics for `t`: unresolved names, concepts referenced but never
/// processed, and the ignored-in/out findings.
pub fn lint(
    t: &Transformation,
    source_mm: &Metamodel,
    target_mm: &Metamodel,
) -> Result<Vec<Lint>, AnalysisError> {
    analyze(t, source_mm, target_mm).map(|r| r.diagnostics)
}

fn build_lints(
    t: &Transformation,
    report: &AnalysisReport,
    unknown: &[&ConceptRef],
    mentioned: &HashMap<&str, Position>,
) -> Vec<Lint> {
    let at = |pos: Position| {
        Some(Location {
            file: t.origin.clone(),
            line: pos.line,
            column: pos.column,
        })
    };
    let file_only = || {
        t.origin.as_ref().map(|f| Location {
            file: Some(f.clone()),
            line: 0,
            column: 0,
        })
    };

    let mut lints = Vec::new();
    for r in unknown {
        let message = if r.name.metamodel != report.source_mm && r.name.metamodel != report.target_mm {
            format!("`{}` is not a metamodel of this transformation", r.name.metamodel)
        } else {
            format!("`{}` names no concept of metamodel `{}`", r.name.concept, r.name.metamodel)
        };
        lints.push(Lint {
            kind: LintKind::UnknownConcept,
            subject: r.name.to_string(),
            location: at(r.position),
            message,
        });
    }
    for p in report.profiles.values() {
        if p.is_unprocessed() && !report.ignored_in.contains(&p.concept) {
            lints.push(Lint {
                kind: LintKind::NeverProcessed,
                subject: p.concept.clone(),
                location: mentioned.get(p.concept.as_str()).copied().and_then(at),
                message: "referenced by the transformation but never copied and never mutated".to_string(),
            });
        }
    }
    for c in report.ignored_in.in_order(&report.source_concepts) {
        lints.push(Lint {
            kind: LintKind::IgnoredIn,
            subject: c,
            location: file_only(),
            message: "concrete source concept never referenced on the source side".to_string(),
        });
    }
    for c in report.ignored_out.in_order(&report.target_concepts) {
        lints.push(Lint {
            kind: LintKind::IgnoredOut,
            subject: c,
            location: file_only(),
            message: "concrete target concept never produced by a target pattern".to_string(),
        });
    }
    lints
}
