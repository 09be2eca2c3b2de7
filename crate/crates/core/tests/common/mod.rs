//! Random metamodels and transformations described abstractly, rendered to
//! source text, with the expected analysis computed straight from the
//! description.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

pub const MAX_CONCEPTS: usize = 12;
pub const MAX_RULES: usize = 8;

#[derive(Debug, Clone)]
pub struct ConceptSpec {
    pub is_abstract: bool,
    /// Always an earlier concept, so hierarchies are acyclic.
    pub supertype: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MetamodelSpec {
    pub concepts: Vec<ConceptSpec>,
}

#[derive(Debug, Clone)]
pub struct RuleSpec {
    pub lazy: bool,
    /// Concepts mentioned by the guard; `None` for an unguarded rule.
    pub guard: Option<Vec<usize>>,
    pub source: usize,
    pub targets: Vec<usize>,
    /// Concepts mentioned in binding values of the first target.
    pub binding_refs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TransformationSpec {
    pub rules: Vec<RuleSpec>,
}

pub fn concept_name(i: usize) -> String {
    format!("C{i}")
}

impl MetamodelSpec {
    pub fn concrete(&self) -> Vec<String> {
        (0..self.concepts.len())
            .filter(|&i| !self.concepts[i].is_abstract)
            .map(concept_name)
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("metamodel M {\n");
        for (i, c) in self.concepts.iter().enumerate() {
            out.push_str("  ");
            if c.is_abstract {
                out.push_str("abstract ");
            }
            out.push_str(&format!("class {}", concept_name(i)));
            if let Some(s) = c.supertype {
                out.push_str(&format!(" extends {}", concept_name(s)));
            }
            out.push_str(&format!(" {{ attr name{i} : String; }}\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl TransformationSpec {
    pub fn render(&self, name: &str) -> String {
        let mut out = format!("module {name};\ncreate OUT : M from IN : M;\n");
        for (k, r) in self.rules.iter().enumerate() {
            let lazy = if r.lazy { "lazy " } else { "" };
            out.push_str(&format!("{lazy}rule R{k} {{\n  from s : M!{}", concept_name(r.source)));
            if let Some(g) = &r.guard {
                let text = if g.is_empty() {
                    "s.name.size() > 0 and 'M!C0' <> ''".to_string()
                } else {
                    g.iter()
                        .map(|&c| format!("s.oclIsKindOf(M!{})", concept_name(c)))
                        .collect::<Vec<_>>()
                        .join(" or ")
                };
                out.push_str(&format!(" ({text})"));
            }
            out.push_str("\n  to ");
            for (j, &t) in r.targets.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("t{j} : M!{}(", concept_name(t)));
                if j == 0 {
                    let bindings: Vec<String> = r
                        .binding_refs
                        .iter()
                        .enumerate()
                        .map(|(b, &c)| format!("p{b} <- M!{}.allInstances()->first()", concept_name(c)))
                        .collect();
                    out.push_str(&bindings.join(", "));
                }
                out.push(')');
            }
            out.push_str("\n}\n");
        }
        out
    }

    pub fn mode(r: &RuleSpec) -> &'static str {
        if r.lazy {
            "lazily"
        } else if r.guard.is_some() {
            "conditionally"
        } else {
            "always"
        }
    }
}

/// What the analysis must report, derived rule by rule from the description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub ignored_in: BTreeSet<String>,
    pub ignored_out: BTreeSet<String>,
    pub copy: BTreeMap<String, BTreeSet<&'static str>>,
    pub mutation: BTreeMap<String, BTreeSet<&'static str>>,
}

pub fn expected(mm: &MetamodelSpec, t: &TransformationSpec) -> Expected {
    let concrete: BTreeSet<String> = mm.concrete().into_iter().collect();
    let mut mentioned = BTreeSet::new();
    let mut produced = BTreeSet::new();
    let mut copy: BTreeMap<String, BTreeSet<&'static str>> =
        concrete.iter().map(|c| (c.clone(), BTreeSet::new())).collect();
    let mut mutation = copy.clone();
    for r in &t.rules {
        mentioned.insert(concept_name(r.source));
        for &c in r.guard.iter().flatten().chain(&r.binding_refs) {
            mentioned.insert(concept_name(c));
        }
        for &c in &r.targets {
            produced.insert(concept_name(c));
        }
        let src = concept_name(r.source);
        let m = TransformationSpec::mode(r);
        if let Some(modes) = if r.targets[0] == r.source {
            copy.get_mut(&src)
        } else {
            mutation.get_mut(&src)
        } {
            modes.insert(m);
        }
    }
    Expected {
        ignored_in: concrete.difference(&mentioned).cloned().collect(),
        ignored_out: concrete.difference(&produced).cloned().collect(),
        copy,
        mutation,
    }
}

pub fn random_metamodel<R: Rng>(rng: &mut R) -> MetamodelSpec {
    let n = rng.gen_range(1..=MAX_CONCEPTS);
    let mut concepts: Vec<ConceptSpec> = (0..n)
        .map(|i| ConceptSpec {
            is_abstract: rng.gen_bool(0.2),
            supertype: if i > 0 && rng.gen_bool(0.3) {
                Some(rng.gen_range(0..i))
            } else {
                None
            },
        })
        .collect();
    if concepts.iter().all(|c| c.is_abstract) {
        concepts[n - 1].is_abstract = false;
    }
    MetamodelSpec { concepts }
}

pub fn random_rule<R: Rng>(rng: &mut R, n: usize) -> RuleSpec {
    let pick = |rng: &mut R, max: usize| -> Vec<usize> {
        let k = rng.gen_range(0..=max);
        (0..k).map(|_| rng.gen_range(0..n)).collect()
    };
    let source = rng.gen_range(0..n);
    let mut targets = pick(rng, 2);
    // Bias towards copies so every profile shape shows up.
    targets.insert(0, if rng.gen_bool(0.5) { source } else { rng.gen_range(0..n) });
    RuleSpec {
        lazy: rng.gen_bool(0.25),
        guard: if rng.gen_bool(0.5) { Some(pick(rng, 3)) } else { None },
        source,
        targets,
        binding_refs: pick(rng, 2),
    }
}

pub fn random_transformation<R: Rng>(rng: &mut R, mm: &MetamodelSpec) -> TransformationSpec {
    let k = rng.gen_range(0..=MAX_RULES);
    TransformationSpec {
        rules: (0..k).map(|_| random_rule(rng, mm.concepts.len())).collect(),
    }
}
