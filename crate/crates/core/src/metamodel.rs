//! Metamodel definitions: concepts, abstractness and inheritance.
//!
//! The `.cmm` surface syntax:
//!
//! ```text
//! metamodel  := "metamodel" IDENT "{" classdef* "}"
//! classdef   := ["abstract"] "class" IDENT ["extends" IDENT ("," IDENT)*] "{" feature* "}"
//! feature    := ("attr" | "ref") IDENT ":" IDENT ["[" MULT "]"] ";"
//! ```
//!
//! Features are kept so a metamodel pretty-prints back to equivalent text, but
//! only concept names, abstractness and supertypes matter to the analyses.

use std::fmt;

use indexmap::IndexMap;

use crate::syntax::{Cursor, ParseError, ParseErrorKind, Position};

const RESERVED: &[&str] = &["metamodel", "abstract", "class", "extends", "attr", "ref"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Attribute,
    Reference,
}

impl FeatureKind {
    fn keyword(self) -> &'static str {
        match self {
            FeatureKind::Attribute => "attr",
            FeatureKind::Reference => "ref",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub kind: FeatureKind,
    pub name: String,
    pub type_name: String,
    pub multiplicity: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub name: String,
    pub is_abstract: bool,
    /// Direct supertypes in declaration order, without duplicates.
    pub supertypes: Vec<String>,
    pub features: Vec<Feature>,
}

impl Concept {
    pub fn concrete(name: impl Into<String>) -> Self {
        Concept {
            name: name.into(),
            is_abstract: false,
            supertypes: Vec::new(),
            features: Vec::new(),
        }
    }

    pub fn abstract_(name: impl Into<String>) -> Self {
        Concept {
            is_abstract: true,
            ..Concept::concrete(name)
        }
    }

    pub fn extends(mut self, supertype: impl Into<String>) -> Self {
        let supertype = supertype.into();
        if !self.supertypes.contains(&supertype) {
            self.supertypes.push(supertype);
        }
        self
    }
}

/// A validated metamodel. Concepts keep their declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metamodel {
    name: String,
    concepts: IndexMap<String, Concept>,
}

/// Source positions recorded while parsing, used to place validation errors.
#[derive(Default)]
struct Spans {
    names: Vec<Position>,
    supertypes: Vec<Vec<Position>>,
}

impl Spans {
    fn name(&self, index: usize) -> Position {
        self.names.get(index).copied().unwrap_or_default()
    }

    fn supertype(&self, index: usize, nth: usize) -> Position {
        self.supertypes
            .get(index)
            .and_then(|s| s.get(nth))
            .copied()
            .unwrap_or_default()
    }
}

impl Metamodel {
    /// Builds and validates a metamodel from concepts. Errors carry a default
    /// (0:0) position since there is no source text.
    pub fn new(name: impl Into<String>, concepts: Vec<Concept>) -> Result<Self, ParseError> {
        Self::validated(name.into(), concepts, &Spans::default())
    }

    fn validated(name: String, concepts: Vec<Concept>, spans: &Spans) -> Result<Self, ParseError> {
        let mut map = IndexMap::with_capacity(concepts.len());
        for (i, concept) in concepts.into_iter().enumerate() {
            if map.contains_key(&concept.name) {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateConcept(concept.name),
                    spans.name(i),
                ));
            }
            map.insert(concept.name.clone(), concept);
        }
        for (i, concept) in map.values().enumerate() {
            for (nth, supertype) in concept.supertypes.iter().enumerate() {
                if !map.contains_key(supertype) {
                    return Err(ParseError::new(
                        ParseErrorKind::UnknownSupertype(supertype.clone()),
                        spans.supertype(i, nth),
                    ));
                }
            }
        }
        if let Some(index) = find_cycle(&map) {
            let name = map.get_index(index).expect("index in range").0.clone();
            return Err(ParseError::new(
                ParseErrorKind::InheritanceCycle(name),
                spans.name(index),
            ));
        }
        Ok(Metamodel {
            name,
            concepts: map,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.concepts.contains_key(name)
    }

    pub fn is_concrete(&self, name: &str) -> bool {
        self.concept(name).is_some_and(|c| !c.is_abstract)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Declaration index of a concept, used to order concept lists.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.concepts.get_index_of(name)
    }

    pub fn abstract_concepts(&self) -> Vec<String> {
        self.concepts()
            .filter(|c| c.is_abstract)
            .map(|c| c.name.clone())
            .collect()
    }

    /// All transitive supertypes of `name`, nearest first.
    pub fn ancestors(&self, name: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut frontier = vec![name.to_string()];
        while let Some(current) = frontier.pop() {
            if let Some(concept) = self.concept(&current) {
                for s in &concept.supertypes {
                    if !out.contains(s) {
                        out.push(s.clone());
                        frontier.push(s.clone());
                    }
                }
            }
        }
        out
    }
}

/// Names of the non-abstract concepts, in declaration order.
pub fn concrete_concepts(mm: &Metamodel) -> Vec<String> {
    mm.concepts()
        .filter(|c| !c.is_abstract)
        .map(|c| c.name.clone())
        .collect()
}

/// Returns the index of some concept lying on an inheritance cycle.
fn find_cycle(concepts: &IndexMap<String, Concept>) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; concepts.len()];

    fn visit(
        index: usize,
        concepts: &IndexMap<String, Concept>,
        marks: &mut [Mark],
    ) -> Option<usize> {
        marks[index] = Mark::Active;
        let (_, concept) = concepts.get_index(index).expect("index in range");
        for supertype in &concept.supertypes {
            let Some(next) = concepts.get_index_of(supertype) else {
                continue;
            };
            match marks[next] {
                Mark::Active => return Some(next),
                Mark::New => {
                    if let Some(found) = visit(next, concepts, marks) {
                        return Some(found);
                    }
                }
                Mark::Done => {}
            }
        }
        marks[index] = Mark::Done;
        None
    }

    (0..concepts.len()).find_map(|i| {
        if marks[i] == Mark::New {
            visit(i, concepts, &mut marks)
        } else {
            None
        }
    })
}

/// Parses and validates `.cmm` text.
pub fn parse_metamodel(source: &str) -> Result<Metamodel, ParseError> {
    let mut cur = Cursor::new(source)?;
    cur.expect_keyword("metamodel")?;
    let name = cur.expect_ident("metamodel name", RESERVED)?.text;
    cur.expect_symbol("{")?;

    let mut concepts = Vec::new();
    let mut spans = Spans::default();
    while !cur.check_symbol("}") {
        let is_abstract = cur.eat_keyword("abstract");
        if !cur.check_keyword("class") {
            return Err(cur.error(if is_abstract {
                "`class`"
            } else {
                "`class`, `abstract` or `}`"
            }));
        }
        cur.next();
        let name_tok = cur.expect_ident("class name", RESERVED)?;
        let mut concept = Concept {
            name: name_tok.text,
            is_abstract,
            supertypes: Vec::new(),
            features: Vec::new(),
        };
        let mut super_pos = Vec::new();
        if cur.eat_keyword("extends") {
            loop {
                let tok = cur.expect_ident("supertype name", RESERVED)?;
                if !concept.supertypes.contains(&tok.text) {
                    concept.supertypes.push(tok.text);
                    super_pos.push(tok.position);
                }
                if !cur.eat_symbol(",") {
                    break;
                }
            }
        }
        cur.expect_symbol("{")?;
        while !cur.eat_symbol("}") {
            concept.features.push(parse_feature(&mut cur)?);
        }
        spans.names.push(name_tok.position);
        spans.supertypes.push(super_pos);
        concepts.push(concept);
    }
    cur.expect_symbol("}")?;
    if !cur.at_end() {
        return Err(cur.error("end of input"));
    }
    Metamodel::validated(name, concepts, &spans)
}

fn parse_feature(cur: &mut Cursor<'_>) -> Result<Feature, ParseError> {
    let kind = if cur.eat_keyword("attr") {
        FeatureKind::Attribute
    } else if cur.eat_keyword("ref") {
        FeatureKind::Reference
    } else {
        return Err(cur.error("`attr`, `ref` or `}`"));
    };
    let name = cur.expect_ident("feature name", RESERVED)?.text;
    cur.expect_symbol(":")?;
    let type_name = cur.expect_ident("feature type", RESERVED)?.text;
    let multiplicity = if cur.check_symbol("[") {
        let open = cur.next().expect("checked");
        let mut text = String::new();
        while !cur.check_symbol("]") {
            match cur.next() {
                Some(t) if matches!(t.text.as_str(), "[" | ";" | "{" | "}") => {
                    return Err(ParseError::syntax(
                        format!("unexpected `{}` in multiplicity", t.text),
                        t.position,
                    ))
                }
                Some(t) => text.push_str(&t.text),
                None => return Err(ParseError::syntax("unclosed multiplicity", open.position)),
            }
        }
        cur.next();
        if text.is_empty() {
            return Err(ParseError::syntax("empty multiplicity", open.position));
        }
        Some(text)
    } else {
        None
    };
    cur.expect_symbol(";")?;
    Ok(Feature {
        kind,
        name,
        type_name,
        multiplicity,
    })
}

impl fmt::Display for Metamodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "metamodel {} {{", self.name)?;
        for c in self.concepts() {
            write!(f, "  ")?;
            if c.is_abstract {
                write!(f, "abstract ")?;
            }
            write!(f, "class {}", c.name)?;
            if !c.supertypes.is_empty() {
                write!(f, " extends {}", c.supertypes.join(", "))?;
            }
            if c.features.is_empty() {
                writeln!(f, " {{}}")?;
                continue;
            }
            writeln!(f, " {{")?;
            for feat in &c.features {
                write!(f, "    {} {} : {}", feat.kind.keyword(), feat.name, feat.type_name)?;
                if let Some(m) = &feat.multiplicity {
                    write!(f, " [{m}]")?;
                }
                writeln!(f, ";")?;
            }
            writeln!(f, "  }}")?;
        }
        writeln!(f, "}}")
    }
}
