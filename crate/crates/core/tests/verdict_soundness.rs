use std::collections::BTreeSet;

use proptest::prelude::*;

use geomodel::chase::{is_model, Interpretation};
use geomodel::geometry::{GeometricInterpretation, Point, Polytope};
use geomodel::rule_check::{check_rule_geometric, witness_is_valid, RuleVerdict};
use geomodel::syntax::{parse_program, KnowledgeBase, Ontology};
use geomodel::Term;

const RULES: &[&str] = &[
    "A(X) -> B(X).",
    "R(X,Y), A(Y) -> B(X).",
    "R(X,X) -> A(X).",
    "A(X) -> exists Y. R(X,Y).",
    "R(X,Y) -> R(Y,X).",
    "R(X,Y), R(Y,Z) -> B(Z).",
    "B(X) -> exists Y. R(Y,X), A(Y).",
    "R(a,X) -> A(X).",
];

fn pts(dim: usize, lo: usize, hi: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, dim).prop_map(|xs| Point::from_ints(&xs)), lo..=hi)
}

fn interpretation() -> impl Strategy<Value = GeometricInterpretation> {
    (pts(1, 3, 3), pts(1, 1, 3), pts(1, 1, 3), pts(2, 1, 4)).prop_map(|(objs, a, b, r)| {
        let mut eta = GeometricInterpretation::new(1);
        for (name, p) in ["a", "b", "c"].iter().zip(objs) {
            eta.add_entity(Term::constant(*name), p).unwrap();
        }
        eta.set_region("A", 1, Polytope::new(1, a).unwrap()).unwrap();
        eta.set_region("B", 1, Polytope::new(1, b).unwrap()).unwrap();
        eta.set_region("R", 2, Polytope::new(2, r).unwrap()).unwrap();
        eta
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Entities are points too, so a rule that holds on every point of the
    // regions holds on the atoms the entities satisfy.
    #[test]
    fn verdicts_agree_with_entity_atoms(eta in interpretation(), which in 0..RULES.len()) {
        let rule = parse_program(RULES[which]).unwrap().ontology.rules[0].clone();
        let phi: BTreeSet<_> = eta.phi_all();
        let kb = KnowledgeBase::new(Ontology { rules: vec![rule.clone()], constraints: vec![] }, BTreeSet::new());
        match check_rule_geometric(&eta, &rule) {
            RuleVerdict::Satisfied => {
                // existential witnesses may be non-entity points, so only datalog
                // rules transfer to the entity atoms
                if rule.is_datalog() {
                    prop_assert!(is_model(&Interpretation::new(phi), &kb));
                }
            }
            RuleVerdict::Violated { witness } => {
                prop_assert!(witness_is_valid(&eta, &rule.body, Some(&rule), &witness).unwrap());
            }
            RuleVerdict::Inconclusive { reason } => prop_assert!(false, "{}", reason),
        }
    }
}
