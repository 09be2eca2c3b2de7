//! The ATL-like transformation language.
//!
//! ```text
//! module    := "module" IDENT ";" header helper* rule*
//! header    := "create" IDENT ":" IDENT "from" IDENT ":" IDENT ";"
//! helper    := "helper" ["context" QREF] "def" ":" IDENT ":" TYPE "=" EXPR ";"
//! rule      := ["lazy"] "rule" IDENT ["extends" IDENT] "{"
//!                "from" IDENT ":" QREF ["(" EXPR ")"]
//!                "to" target ("," target)* "}"
//! target    := IDENT ":" QREF "(" [binding ("," binding)*] ")"
//! binding   := IDENT "<-" EXPR
//! QREF      := IDENT "!" IDENT
//! ```
//!
//! OCL bodies are not parsed. An [`Expression`] keeps its verbatim text and
//! the qualified type literals (`MM!Name`) found in its token run. Helpers and
//! rules may be interleaved.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::metamodel::Metamodel;
use crate::syntax::{Cursor, ParseError, ParseErrorKind, Position, Token};

const RESERVED: &[&str] = &[
    "module", "create", "from", "to", "rule", "lazy", "extends", "helper", "context", "def",
];

/// `Metamodel!Concept`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualifiedName {
    pub metamodel: String,
    pub concept: String,
}

impl QualifiedName {
    pub fn new(metamodel: impl Into<String>, concept: impl Into<String>) -> Self {
        QualifiedName {
            metamodel: metamodel.into(),
            concept: concept.into(),
        }
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.metamodel, self.concept)
    }
}

/// One occurrence of a qualified name in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptRef {
    pub name: QualifiedName,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    pub raw: String,
    /// Every qualified type literal in `raw`, in source order.
    pub references: Vec<ConceptRef>,
}

impl Expression {
    fn from_tokens(source: &str, tokens: &[Token]) -> Self {
        let raw = match (tokens.first(), tokens.last()) {
            (Some(first), Some(last)) => source[first.start..last.end].to_string(),
            _ => String::new(),
        };
        let references = tokens
            .windows(3)
            .filter(|w| w[0].is_ident() && w[1].is_symbol("!") && w[2].is_ident())
            .map(|w| ConceptRef {
                name: QualifiedName::new(&w[0].text, &w[2].text),
                position: w[0].position,
            })
            .collect();
        Expression { raw, references }
    }

    /// Scans a standalone expression. Brackets must balance.
    pub fn scan(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let tokens = cur.balanced_run(&[])?;
        Ok(Expression::from_tokens(text, &tokens))
    }

    pub fn referenced_concepts(&self) -> BTreeSet<QualifiedName> {
        self.references.iter().map(|r| r.name.clone()).collect()
    }
}

/// References of an expression split against one metamodel.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReferenceSplit {
    pub known: BTreeSet<String>,
    pub unknown: BTreeSet<QualifiedName>,
}

/// Partitions the references of `expr` into concepts of `mm` and everything else.
pub fn referenced_concepts(expr: &Expression, mm: &Metamodel) -> ReferenceSplit {
    let mut split = ReferenceSplit::default();
    for r in &expr.references {
        if r.name.metamodel == mm.name() && mm.contains(&r.name.concept) {
            split.known.insert(r.name.concept.clone());
        } else {
            split.unknown.insert(r.name.clone());
        }
    }
    split
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Helper {
    pub name: String,
    pub context: Option<ConceptRef>,
    pub return_type: String,
    pub body: Expression,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub property: String,
    pub value: Expression,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPattern {
    pub var: String,
    pub concept: ConceptRef,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lazy: bool,
    pub parent_rule: Option<String>,
    pub source_var: String,
    pub source_concept: ConceptRef,
    pub guard: Option<Expression>,
    /// Never empty.
    pub targets: Vec<TargetPattern>,
    pub position: Position,
}

impl Rule {
    /// Every expression of the rule that navigates the source model.
    pub fn expressions(&self) -> impl Iterator<Item = &Expression> {
        self.guard
            .iter()
            .chain(self.targets.iter().flat_map(|t| t.bindings.iter().map(|b| &b.value)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformation {
    pub name: String,
    pub target_model: String,
    pub target_metamodel: String,
    pub source_model: String,
    pub source_metamodel: String,
    pub helpers: Vec<Helper>,
    pub rules: Vec<Rule>,
    /// Where the text came from (a file path), echoed in diagnostics.
    pub origin: Option<String>,
}

impl Transformation {
    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = Some(origin.into());
        self
    }

    pub fn is_endogenous(&self) -> bool {
        self.source_metamodel == self.target_metamodel
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Parses `.tfm` text into a [`Transformation`].
pub fn parse_transformation(source: &str) -> Result<Transformation, ParseError> {
    let mut cur = Cursor::new(source)?;
    cur.expect_keyword("module")?;
    let name = cur.expect_ident("module name", RESERVED)?.text;
    cur.expect_symbol(";")?;

    cur.expect_keyword("create")?;
    let target_model = cur.expect_ident("target model name", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let target_metamodel = cur.expect_ident("target metamodel name", RESERVED)?.text;
    cur.expect_keyword("from")?;
    let source_model = cur.expect_ident("source model name", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let source_metamodel = cur.expect_ident("source metamodel name", RESERVED)?.text;
    cur.expect_symbol(";")?;

    let mut helpers = Vec::new();
    let mut rules: Vec<Rule> = Vec::new();
    let mut parent_positions = Vec::new();
    while !cur.at_end() {
        if cur.check_keyword("helper") {
            helpers.push(parse_helper(&mut cur)?);
        } else if cur.check_keyword("rule") || cur.check_keyword("lazy") {
            let (rule, parent_pos) = parse_rule(&mut cur, &source_metamodel)?;
            if rules.iter().any(|r| r.name == rule.name) {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateRule(rule.name),
                    rule.position,
                ));
            }
            parent_positions.push(parent_pos);
            rules.push(rule);
        } else {
            return Err(cur.error("`helper`, `rule` or `lazy rule`"));
        }
    }

    let names: HashSet<&str> = rules.iter().map(|r| r.name.as_str()).collect();
    for (rule, pos) in rules.iter().zip(&parent_positions) {
        if let Some(parent) = &rule.parent_rule {
            if !names.contains(parent.as_str()) {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownParentRule(parent.clone()),
                    pos.unwrap_or(rule.position),
                ));
            }
        }
    }

    Ok(Transformation {
        name,
        target_model,
        target_metamodel,
        source_model,
        source_metamodel,
        helpers,
        rules,
        origin: None,
    })
}

fn parse_qref(cur: &mut Cursor<'_>) -> Result<ConceptRef, ParseError> {
    let mm = cur.expect_ident("qualified concept `Metamodel!Concept`", RESERVED)?;
    cur.expect_symbol("!")?;
    let concept = cur.expect_ident("concept name", &[])?;
    Ok(ConceptRef {
        name: QualifiedName::new(mm.text, concept.text),
        position: mm.position,
    })
}

fn parse_helper(cur: &mut Cursor<'_>) -> Result<Helper, ParseError> {
    let position = cur.expect_keyword("helper")?.position;
    let context = if cur.eat_keyword("context") {
        Some(parse_qref(cur)?)
    } else {
        None
    };
    cur.expect_keyword("def")?;
    cur.expect_symbol(":")?;
    let name = cur.expect_ident("helper name", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let type_tokens = cur.balanced_run(&["="])?;
    if type_tokens.is_empty() {
        return Err(cur.error("helper type"));
    }
    let return_type = Expression::from_tokens(cur.source, &type_tokens).raw;
    cur.expect_symbol("=")?;
    let body = expression(cur, &[";"], "helper body")?;
    cur.expect_symbol(";")?;
    Ok(Helper {
        name,
        context,
        return_type,
        body,
        position,
    })
}

fn expression(cur: &mut Cursor<'_>, terminators: &[&str], what: &str) -> Result<Expression, ParseError> {
    let start = cur.position();
    let tokens = cur.balanced_run(terminators)?;
    if tokens.is_empty() {
        return Err(ParseError::syntax(format!("empty {what}"), start));
    }
    Ok(Expression::from_tokens(cur.source, &tokens))
}

fn parse_rule(
    cur: &mut Cursor<'_>,
    source_metamodel: &str,
) -> Result<(Rule, Option<Position>), ParseError> {
    let position = cur.position();
    let lazy = cur.eat_keyword("lazy");
    cur.expect_keyword("rule")?;
    let name = cur.expect_ident("rule name", RESERVED)?.text;
    let mut parent_pos = None;
    let parent_rule = if cur.eat_keyword("extends") {
        let tok = cur.expect_ident("parent rule name", RESERVED)?;
        parent_pos = Some(tok.position);
        Some(tok.text)
    } else {
        None
    };
    cur.expect_symbol("{")?;
    cur.expect_keyword("from")?;
    let source_var = cur.expect_ident("source variable", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let source_concept = parse_qref(cur)?;
    if source_concept.name.metamodel != source_metamodel {
        return Err(ParseError::new(
            ParseErrorKind::ForeignSourceConcept {
                found: source_concept.name.to_string(),
                expected: source_metamodel.to_string(),
            },
            source_concept.position,
        ));
    }
    let guard = if cur.eat_symbol("(") {
        let guard = expression(cur, &[")"], "guard")?;
        cur.expect_symbol(")")?;
        Some(guard)
    } else {
        None
    };
    cur.expect_keyword("to")?;
    let mut targets = vec![parse_target(cur)?];
    while cur.eat_symbol(",") {
        targets.push(parse_target(cur)?);
    }
    cur.expect_symbol("}")?;
    Ok((
        Rule {
            name,
            lazy,
            parent_rule,
            source_var,
            source_concept,
            guard,
            targets,
            position,
        },
        parent_pos,
    ))
}

fn parse_target(cur: &mut Cursor<'_>) -> Result<TargetPattern, ParseError> {
    let var = cur.expect_ident("target variable", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let concept = parse_qref(cur)?;
    cur.expect_symbol("(")?;
    let mut bindings = Vec::new();
    if !cur.check_symbol(")") {
        loop {
            let property = cur.expect_ident("binding property", RESERVED)?.text;
            cur.expect_symbol("<-")?;
            let value = expression(cur, &[",", ")"], "binding value")?;
            bindings.push(Binding { property, value });
            if !cur.eat_symbol(",") {
                break;
            }
        }
    }
    cur.expect_symbol(")")?;
    Ok(TargetPattern {
        var,
        concept,
        bindings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::parse_metamodel;

    const HEADER: &str = "module m;\ncreate OUT : CPPivot from IN : CPPivot;\n";

    fn module(body: &str) -> String {
        format!("{HEADER}{body}")
    }

    #[test]
    fn empty_module_has_no_rules() {
        let t = parse_transformation(HEADER).unwrap();
        assert!(t.rules.is_empty());
        assert_eq!(t.source_metamodel, "CPPivot");
        assert_eq!(t.target_model, "OUT");
    }

    #[test]
    fn always_copy_listing() {
        let t = parse_transformation(&module(crate::fixtures::LISTING_ALWAYS_COPY)).unwrap();
        let r = &t.rules[0];
        assert_eq!(r.name, "DataType");
        assert!(!r.lazy);
        assert!(r.guard.is_none());
        assert_eq!(r.source_concept.name, QualifiedName::new("CPPivot", "DataType"));
        assert_eq!(r.targets.len(), 1);
        assert_eq!(r.targets[0].concept.name.concept, "DataType");
        assert_eq!(r.targets[0].bindings[0].property, "name");
        assert_eq!(r.targets[0].bindings[0].value.raw, "s.name");
    }

    #[test]
    fn lazy_listing_records_parent() {
        let body = format!(
            "lazy rule lazyExpression {{ from e : CPPivot!Expression to t : CPPivot!Expression() }}\n{}",
            crate::fixtures::LISTING_LAZY_COPY
        );
        let t = parse_transformation(&module(&body)).unwrap();
        let r = t.rule("lazyBoolVal").unwrap();
        assert!(r.lazy);
        assert_eq!(r.parent_rule.as_deref(), Some("lazyExpression"));
    }

    #[test]
    fn guard_is_verbatim() {
        let t = parse_transformation(&module(crate::fixtures::LISTING_CONDITIONAL_COPY)).unwrap();
        let guard = t.rules[0].guard.as_ref().unwrap();
        assert_eq!(guard.raw, "not s.parent.oclIsTypeOf(CPPivot!IndexVariable)");
        assert_eq!(
            guard.referenced_concepts().into_iter().collect::<Vec<_>>(),
            [QualifiedName::new("CPPivot", "IndexVariable")]
        );
    }

    #[test]
    fn guard_references_split_against_metamodel() {
        let mm = parse_metamodel("metamodel CPPivot { class IndexVariable {} class SetDomain {} }").unwrap();
        let t = parse_transformation(&module(crate::fixtures::LISTING_CONDITIONAL_COPY)).unwrap();
        let split = referenced_concepts(t.rules[0].guard.as_ref().unwrap(), &mm);
        assert_eq!(split.known.into_iter().collect::<Vec<_>>(), ["IndexVariable"]);
        assert!(split.unknown.is_empty());

        let plain = Expression::scan("1 + 2").unwrap();
        assert_eq!(referenced_concepts(&plain, &mm), ReferenceSplit::default());

        let typo = Expression::scan("s.oclIsTypeOf(CPPivot!Clazz)").unwrap();
        let split = referenced_concepts(&typo, &mm);
        assert!(split.known.is_empty());
        assert_eq!(
            split.unknown.into_iter().collect::<Vec<_>>(),
            [QualifiedName::new("CPPivot", "Clazz")]
        );
    }

    #[test]
    fn helpers_with_and_without_context() {
        let body = "helper context CPPivot!Forall def : isDeepest : Boolean =\n  not self.statements->exists(e | e.oclIsKindOf(CPPivot!Forall));\nhelper def : limit : Sequence(Integer) = Sequence{1, 2};\n";
        let t = parse_transformation(&module(body)).unwrap();
        assert_eq!(t.helpers.len(), 2);
        assert_eq!(t.helpers[0].context.as_ref().unwrap().name.concept, "Forall");
        assert_eq!(t.helpers[0].return_type, "Boolean");
        assert_eq!(t.helpers[1].return_type, "Sequence(Integer)");
        assert_eq!(t.helpers[1].body.raw, "Sequence{1, 2}");
    }

    #[test]
    fn multiple_targets_and_nested_commas() {
        let body = "rule R { from s : CPPivot!A ( s.f(1, 2) ) to a : CPPivot!B ( x <- s.g(3, 4), y <- 'p,q' ), b : CPPivot!C () }";
        let t = parse_transformation(&module(body)).unwrap();
        let r = &t.rules[0];
        assert_eq!(r.targets.len(), 2);
        assert_eq!(r.targets[0].bindings[0].value.raw, "s.g(3, 4)");
        assert_eq!(r.targets[0].bindings[1].value.raw, "'p,q'");
        assert!(r.targets[1].bindings.is_empty());
    }

    #[test]
    fn duplicate_rule_is_rejected() {
        let body = "rule R { from s : CPPivot!A to t : CPPivot!A() }\nrule R { from s : CPPivot!B to t : CPPivot!B() }";
        let err = parse_transformation(&module(body)).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateRule("R".into()));
        assert_eq!(err.position, Position::new(4, 1));
    }

    #[test]
    fn unknown_parent_rule() {
        let body = "rule R extends Missing { from s : CPPivot!A to t : CPPivot!A() }";
        let err = parse_transformation(&module(body)).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownParentRule("Missing".into()));
        assert_eq!(err.position, Position::new(3, 16));
    }

    #[test]
    fn source_pattern_must_use_source_metamodel() {
        let body = "rule R { from s : Other!A to t : CPPivot!A() }";
        let err = parse_transformation(&module(body)).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ForeignSourceConcept { .. }));
    }

    #[test]
    fn missing_target_is_a_syntax_error() {
        let body = "rule R { from s : CPPivot!A }";
        let err = parse_transformation(&module(body)).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(err.position, Position::new(3, 29));
    }

    #[test]
    fn unbalanced_guard() {
        let body = "rule R { from s : CPPivot!A ( s.f(1 ) to t : CPPivot!A() }";
        let err = parse_transformation(&module(body)).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn references_in_strings_are_ignored() {
        let e = Expression::scan("'CPPivot!Fake' + CPPivot ! Real").unwrap();
        assert_eq!(
            e.referenced_concepts().into_iter().collect::<Vec<_>>(),
            [QualifiedName::new("CPPivot", "Real")]
        );
    }
}
