//! Static analysis of rule-based model transformations.
//!
//! Parse a metamodel ([`parse_metamodel`]) and a transformation
//! ([`parse_transformation`]), abstract the rules into per-concept profiles
//! ([`analyze`]), reason about chains of endogenous transformations
//! ([`check_chain`], [`plan_chain`]) and render summary tables
//! ([`report`]).

pub mod analyzer;
pub mod chain;
pub mod concepts;
pub mod fixtures;
pub mod metamodel;
pub mod report;
pub mod syntax;
pub mod tdsl;

pub use analyzer::{
    analyze, classify_rule, detect_fixed_point, lint, Action, AnalysisError, AnalysisReport,
    ConceptProfile, FixedPointVerdict, Lint, LintKind, Location, Mode, ModeSet, RuleClassification,
};
pub use chain::{check_chain, plan_chain, propagate, ChainError, ChainPlan, ChainStep, Goal};
pub use concepts::ConceptSet;
pub use metamodel::{concrete_concepts, parse_metamodel, Concept, Feature, FeatureKind, Metamodel};
pub use report::{Format, ReportDocument, Table};
pub use syntax::{ParseError, ParseErrorKind, Position};
pub use tdsl::{parse_transformation, Expression, QualifiedName, Rule, Transformation};
