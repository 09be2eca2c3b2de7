//! The bundled constraint-programming corpus: a pivot metamodel and five
//! endogenous reformulation transformations over it, plus golden outputs.

use crate::metamodel::{parse_metamodel, Metamodel};
use crate::tdsl::{parse_transformation, Transformation};

pub const PIVOT: &str = include_str!("../fixtures/pivot.cmm");

/// `(file stem, source)` in table row order.
pub const TRANSFORMATIONS: [(&str, &str); 5] = [
    ("classInstantiation", include_str!("../fixtures/classInstantiation.tfm")),
    ("enumRemoval", include_str!("../fixtures/enumRemoval.tfm")),
    ("forallRemoval", include_str!("../fixtures/forallRemoval.tfm")),
    ("recordRemoval", include_str!("../fixtures/recordRemoval.tfm")),
    ("uselessIfRemoval", include_str!("../fixtures/uselessIfRemoval.tfm")),
];

pub const GOLDEN_IGNORED_TABLE: &str = include_str!("../fixtures/ignored.md");
pub const GOLDEN_REFERENCED_TABLE: &str = include_str!("../fixtures/referenced.md");

/// Single rules with no module header around them.
pub const LISTING_ALWAYS_COPY: &str = include_str!("../fixtures/listings/always_copy.tfm");
pub const LISTING_CONDITIONAL_COPY: &str = include_str!("../fixtures/listings/conditional_copy.tfm");
/// Extends `lazyExpression`, which must be declared alongside it.
pub const LISTING_LAZY_COPY: &str = include_str!("../fixtures/listings/lazy_copy.tfm");
pub const LISTING_CONDITIONAL_MUTATION: &str =
    include_str!("../fixtures/listings/conditional_mutation.tfm");

pub fn pivot() -> Metamodel {
    parse_metamodel(PIVOT).expect("bundled pivot metamodel parses")
}

pub fn transformation(name: &str) -> Option<Transformation> {
    TRANSFORMATIONS.iter().find(|(n, _)| *n == name).map(|(n, src)| {
        parse_transformation(src)
            .unwrap_or_else(|e| panic!("bundled {n}.tfm: {e}"))
            .with_origin(format!("{n}.tfm"))
    })
}

/// The pivot metamodel and the five transformations, in row order.
pub fn fixture_corpus() -> (Metamodel, Vec<Transformation>) {
    let ts = TRANSFORMATIONS
        .iter()
        .map(|(n, _)| transformation(n).expect("listed"))
        .collect();
    (pivot(), ts)
}

/// `(stem, golden JSON report)`.
pub const GOLDEN_REPORTS: [(&str, &str); 5] = [
    ("classInstantiation", include_str!("../fixtures/reports/classInstantiation.json")),
    ("enumRemoval", include_str!("../fixtures/reports/enumRemoval.json")),
    ("forallRemoval", include_str!("../fixtures/reports/forallRemoval.json")),
    ("recordRemoval", include_str!("../fixtures/reports/recordRemoval.json")),
    ("uselessIfRemoval", include_str!("../fixtures/reports/uselessIfRemoval.json")),
];
