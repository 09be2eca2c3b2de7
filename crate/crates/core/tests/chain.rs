mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xformlens::fixtures::fixture_corpus;
use xformlens::{
    analyze, check_chain, concrete_concepts, parse_metamodel, parse_transformation, plan_chain,
    propagate, AnalysisReport, ConceptSet, Goal,
};

fn corpus() -> (Vec<String>, Vec<AnalysisReport>) {
    let (mm, ts) = fixture_corpus();
    let reports = ts.iter().map(|t| analyze(t, &mm, &mm).unwrap()).collect();
    (concrete_concepts(&mm), reports)
}

fn by_name<'a>(reports: &'a [AnalysisReport], name: &str) -> &'a AnalysisReport {
    reports.iter().find(|r| r.transformation == name).unwrap()
}

fn set(items: &[&str]) -> ConceptSet {
    items.iter().copied().collect()
}

/// Tries every chain of length `0..=max_len`, shortest first and in name
/// order within a length; the first valid chain meeting the goal wins.
fn brute_force(
    library: &[AnalysisReport],
    initial: &ConceptSet,
    goal: &Goal,
    max_len: usize,
) -> Option<Vec<String>> {
    fn extend<'a>(
        sorted: &[&'a AnalysisReport],
        set: &ConceptSet,
        goal: &Goal,
        left: usize,
        chain: &mut Vec<&'a AnalysisReport>,
    ) -> bool {
        if left == 0 {
            return goal.is_met_by(set);
        }
        for &r in sorted {
            if !set.is_subset(&r.refined_domain) {
                continue;
            }
            chain.push(r);
            if extend(sorted, &propagate(set, r), goal, left - 1, chain) {
                return true;
            }
            chain.pop();
        }
        false
    }

    let mut sorted: Vec<&AnalysisReport> = library.iter().collect();
    sorted.sort_by(|a, b| a.transformation.cmp(&b.transformation));
    for len in 0..=max_len {
        let mut chain = Vec::new();
        if extend(&sorted, initial, goal, len, &mut chain) {
            let plan = check_chain(initial, &chain, goal).unwrap();
            assert!(plan.goal_met);
            return Some(chain.iter().map(|r| r.transformation.clone()).collect());
        }
    }
    None
}

#[test]
fn record_removal_needs_class_instantiation_first() {
    let (all, rs) = corpus();
    let initial: ConceptSet = all.iter().cloned().collect();
    let alone = check_chain(&initial, &[by_name(&rs, "recordRemoval")], &Goal::default()).unwrap();
    assert!(!alone.steps[0].valid);
    assert_eq!(alone.steps[0].outside_domain, set(&["Class"]));

    let chain = [by_name(&rs, "classInstantiation"), by_name(&rs, "recordRemoval")];
    let plan = check_chain(&initial, &chain, &Goal::default()).unwrap();
    assert!(plan.all_valid());
    assert!(!plan.final_set().contains("Class"));
    assert!(!plan.final_set().contains("Record"));
}

#[test]
fn enum_removal_drops_enumerations() {
    let (all, rs) = corpus();
    let initial: ConceptSet = all.iter().cloned().collect();
    let out = propagate(&initial, by_name(&rs, "enumRemoval"));
    let mut want = initial.clone();
    want.remove("EnumLiteral");
    want.remove("Enumeration");
    assert_eq!(out, want);
}

#[test]
fn fixed_point_transformations_keep_the_full_set() {
    let (all, rs) = corpus();
    let initial: ConceptSet = all.iter().cloned().collect();
    for name in ["forallRemoval", "uselessIfRemoval"] {
        assert_eq!(propagate(&initial, by_name(&rs, name)), initial, "{name}");
    }
}

#[test]
fn planner_removes_records_and_classes() {
    let (all, rs) = corpus();
    let initial: ConceptSet = all.iter().cloned().collect();
    let goal = Goal::new(ConceptSet::new(), set(&["Record"]));
    let plan = plan_chain(&rs, &initial, &goal, 4).unwrap();
    assert_eq!(plan.names(), ["classInstantiation", "recordRemoval"]);
    let goal = Goal::new(ConceptSet::new(), set(&["Class"]));
    assert_eq!(plan_chain(&rs, &initial, &goal, 4).unwrap().names(), ["classInstantiation"]);
}

#[test]
fn forall_is_never_removed_from_a_set() {
    // Loop unrolling lazily copies inner loops, so the concept survives every step.
    let (all, rs) = corpus();
    let initial: ConceptSet = all.iter().cloned().collect();
    let goal = Goal::new(ConceptSet::new(), set(&["Forall"]));
    assert!(plan_chain(&rs, &initial, &goal, 4).is_none());
    assert!(brute_force(&rs, &initial, &goal, 4).is_none());
}

#[test]
fn planner_agrees_with_brute_force_on_the_corpus() {
    let (all, rs) = corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let removable = ["Class", "Record", "EnumLiteral", "Enumeration"];
    let (mut found, mut missing) = (0, 0);
    for _ in 0..40 {
        let initial: ConceptSet = all.iter().filter(|_| rng.gen_bool(0.85)).cloned().collect();
        let required: ConceptSet = all.iter().filter(|_| rng.gen_bool(0.1)).cloned().collect();
        let forbidden: ConceptSet = all
            .iter()
            .filter(|c| rng.gen_bool(if removable.contains(&c.as_str()) { 0.4 } else { 0.02 }))
            .cloned()
            .collect();
        let goal = Goal::new(required, forbidden);
        let plan = plan_chain(&rs, &initial, &goal, 4);
        let oracle = brute_force(&rs, &initial, &goal, 4);
        assert_eq!(
            plan.as_ref().map(|p| p.names().into_iter().map(String::from).collect::<Vec<_>>()),
            oracle,
            "initial {initial}, goal {goal:?}"
        );
        if oracle.is_some() {
            found += 1;
        } else {
            missing += 1;
        }
    }
    assert!(found > 5 && missing > 5, "{found} plans, {missing} without");
}

#[test]
fn planner_agrees_with_brute_force_on_random_libraries() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..60 {
        let spec = common::random_metamodel(&mut rng);
        let mm = parse_metamodel(&spec.render()).unwrap();
        let library: Vec<AnalysisReport> = (0..rng.gen_range(1..=4))
            .map(|k| {
                let t = common::random_transformation(&mut rng, &spec);
                let t = parse_transformation(&t.render(&format!("t{k}"))).unwrap();
                analyze(&t, &mm, &mm).unwrap()
            })
            .collect();
        let concrete = spec.concrete();
        let pick = |rng: &mut ChaCha8Rng, p: f64| -> ConceptSet {
            concrete.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
        };
        let initial = pick(&mut rng, 0.5);
        let goal = Goal::new(pick(&mut rng, 0.2), pick(&mut rng, 0.2));
        let plan = plan_chain(&library, &initial, &goal, 3);
        let oracle = brute_force(&library, &initial, &goal, 3);
        assert_eq!(
            plan.as_ref().map(|p| p.names().into_iter().map(String::from).collect::<Vec<_>>()),
            oracle,
            "round {round}"
        );
        if let Some(p) = plan {
            assert!(p.goal_met && p.all_valid());
            assert!(goal.is_met_by(p.final_set()));
        }
    }
}
