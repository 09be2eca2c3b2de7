//! Chain validation and planning over refined signatures.
//!
//! A step is valid when every concept that can reach it lies in its refined
//! domain. The concepts leaving a step are the targets of every rule whose
//! source concept can enter it, so a concept disappears only when no rule
//! produces it from the current input.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::analyzer::AnalysisReport;
use crate::concepts::ConceptSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("step {step} (`{transformation}`) reads `{expected}` but the previous step writes `{found}`")]
    MetamodelMismatch {
        step: usize,
        transformation: String,
        expected: String,
        found: String,
    },
}

/// Concepts that must be present and concepts that must be absent at the end.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Goal {
    pub required: ConceptSet,
    pub forbidden: ConceptSet,
}

impl Goal {
    pub fn new(required: ConceptSet, forbidden: ConceptSet) -> Self {
        Goal {
            required,
            forbidden,
        }
    }

    pub fn is_met_by(&self, set: &ConceptSet) -> bool {
        self.required.is_subset(set) && set.is_disjoint(&self.forbidden)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub transformation: String,
    pub input_set: ConceptSet,
    pub output_set: ConceptSet,
    pub valid: bool,
    /// Input concepts outside the refined domain; empty iff `valid`.
    pub outside_domain: ConceptSet,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPlan {
    pub initial: ConceptSet,
    pub steps: Vec<ChainStep>,
    pub goal_met: bool,
}

impl ChainPlan {
    pub fn final_set(&self) -> &ConceptSet {
        self.steps.last().map(|s| &s.output_set).unwrap_or(&self.initial)
    }

    pub fn all_valid(&self) -> bool {
        self.steps.iter().all(|s| s.valid)
    }

    pub fn names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.transformation.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Concepts produced when a model over `set` goes through `report`.
pub fn propagate(set: &ConceptSet, report: &AnalysisReport) -> ConceptSet {
    report
        .rules
        .iter()
        .filter(|r| set.contains(&r.source))
        .flat_map(|r| r.targets.iter())
        .filter(|c| report.refined_codomain.contains(c))
        .cloned()
        .collect()
}

/// Folds `initial` through `chain`, marking invalid steps and steps whose
/// new concepts a later step drops again.
pub fn check_chain(
    initial: &ConceptSet,
    chain: &[&AnalysisReport],
    goal: &Goal,
) -> Result<ChainPlan, ChainError> {
    for (i, pair) in chain.windows(2).enumerate() {
        if pair[0].target_mm != pair[1].source_mm {
            return Err(ChainError::MetamodelMismatch {
                step: i + 2,
                transformation: pair[1].transformation.clone(),
                expected: pair[1].source_mm.clone(),
                found: pair[0].target_mm.clone(),
            });
        }
    }

    let mut steps: Vec<ChainStep> = Vec::with_capacity(chain.len());
    let mut current = initial.clone();
    for report in chain {
        let output = propagate(&current, report);
        let outside = current.difference(&report.refined_domain);
        steps.push(ChainStep {
            transformation: report.transformation.clone(),
            valid: outside.is_empty(),
            outside_domain: outside,
            input_set: current,
            output_set: output.clone(),
            warnings: Vec::new(),
        });
        current = output;
    }

    for i in 0..steps.len() {
        let created = steps[i].output_set.difference(&steps[i].input_set);
        if created.is_empty() {
            continue;
        }
        let order = &chain[i].target_concepts;
        let mut remaining = created;
        for j in i + 1..steps.len() {
            let dropped = remaining.difference(&steps[j].output_set);
            if dropped.is_empty() {
                continue;
            }
            let warning = format!(
                "useless step: creates {} which step {} (`{}`) removes again",
                dropped.in_order(order).join(", "),
                j + 1,
                steps[j].transformation
            );
            steps[i].warnings.push(warning);
            remaining = remaining.difference(&dropped);
            if remaining.is_empty() {
                break;
            }
        }
    }

    let goal_met = steps.iter().all(|s| s.valid)
        && goal.is_met_by(steps.last().map(|s| &s.output_set).unwrap_or(initial));
    Ok(ChainPlan {
        initial: initial.clone(),
        steps,
        goal_met,
    })
}

/// Breadth-first search for a shortest valid chain from `initial` whose final
/// set meets `goal`. Ties go to the lexicographically smallest sequence of
/// transformation names.
pub fn plan_chain(
    library: &[AnalysisReport],
    initial: &ConceptSet,
    goal: &Goal,
    max_len: usize,
) -> Option<ChainPlan> {
    let mut order: Vec<usize> = (0..library.len()).collect();
    order.sort_by(|&a, &b| library[a].transformation.cmp(&library[b].transformation).then(a.cmp(&b)));

    // State: the metamodel the set lives in (None before the first step) and the set.
    type State = (Option<String>, ConceptSet);
    let start: State = (None, initial.clone());
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start.clone());
    let mut queue: VecDeque<(State, Vec<usize>)> = VecDeque::new();
    queue.push_back((start, Vec::new()));

    while let Some(((mm, set), path)) = queue.pop_front() {
        if goal.is_met_by(&set) {
            let chain: Vec<&AnalysisReport> = path.iter().map(|&i| &library[i]).collect();
            let mut plan = check_chain(initial, &chain, goal).expect("planner only links compatible steps");
            plan.goal_met = true;
            return Some(plan);
        }
        if path.len() == max_len {
            continue;
        }
        for &i in &order {
            let report = &library[i];
            if mm.as_ref().is_some_and(|m| *m != report.source_mm) {
                continue;
            }
            if !set.is_subset(&report.refined_domain) {
                continue;
            }
            let next: State = (Some(report.target_mm.clone()), propagate(&set, report));
            if seen.insert(next.clone()) {
                let mut next_path = path.clone();
                next_path.push(i);
                queue.push_back((next, next_path));
            }
        }
    }
    None
}
