//! Structural analyses: quasi-chainedness, weak acyclicity and single-head
//! normalization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{ordered_vars, Atom, ExistentialRule, NegativeConstraint, Ontology, Term};

/// Largest body for which all atom orderings are searched.
pub const DEFAULT_QC_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QcError {
    #[error("body has {0} atoms, above the ordering search cap")]
    BodyTooLarge(usize),
}

#[derive(Clone, Copy, Debug)]
pub enum StatementRef<'a> {
    Rule(&'a ExistentialRule),
    Constraint(&'a NegativeConstraint),
}

impl<'a> StatementRef<'a> {
    pub fn body(&self) -> &'a [Atom] {
        match self {
            StatementRef::Rule(r) => &r.body,
            StatementRef::Constraint(c) => &c.body,
        }
    }
}

impl std::fmt::Display for StatementRef<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatementRef::Rule(r) => write!(f, "{r}"),
            StatementRef::Constraint(c) => write!(f, "{c}"),
        }
    }
}

/// Searches for an ordering of `body` in which every atom shares at most one
/// variable with the atoms before it. Returns the witnessing permutation.
pub fn quasi_chained_order(body: &[Atom], cap: usize) -> Result<Option<Vec<usize>>, QcError> {
    if body.len() > cap {
        return Err(QcError::BodyTooLarge(body.len()));
    }
    let vars: Vec<BTreeSet<&str>> = body.iter().map(Atom::var_set).collect();
    let mut order = Vec::with_capacity(body.len());
    let mut used = vec![false; body.len()];
    let found = extend_order(&vars, &mut used, &mut order, &BTreeSet::new());
    Ok(found.then_some(order))
}

fn extend_order<'a>(
    vars: &[BTreeSet<&'a str>],
    used: &mut [bool],
    order: &mut Vec<usize>,
    prefix: &BTreeSet<&'a str>,
) -> bool {
    if order.len() == vars.len() {
        return true;
    }
    let mut tried: Vec<&BTreeSet<&str>> = Vec::new();
    for i in 0..vars.len() {
        if used[i] || prefix.intersection(&vars[i]).count() > 1 {
            continue;
        }
        // atoms with identical variable sets are interchangeable
        if tried.contains(&&vars[i]) {
            continue;
        }
        tried.push(&vars[i]);
        used[i] = true;
        order.push(i);
        let next: BTreeSet<&str> = prefix.union(&vars[i]).copied().collect();
        if extend_order(vars, used, order, &next) {
            return true;
        }
        order.pop();
        used[i] = false;
    }
    false
}

pub fn is_quasi_chained(stmt: StatementRef<'_>) -> Result<bool, QcError> {
    quasi_chained_order(stmt.body(), DEFAULT_QC_CAP).map(|o| o.is_some())
}

/// First rule or constraint of an ontology that is not quasi-chained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonQuasiChained {
    pub is_constraint: bool,
    pub index: usize,
    pub text: String,
}

pub fn ontology_qc_violation(ontology: &Ontology, cap: usize) -> Result<Option<NonQuasiChained>, QcError> {
    for (index, r) in ontology.rules.iter().enumerate() {
        if quasi_chained_order(&r.body, cap)?.is_none() {
            return Ok(Some(NonQuasiChained { is_constraint: false, index, text: r.to_string() }));
        }
    }
    for (index, c) in ontology.constraints.iter().enumerate() {
        if quasi_chained_order(&c.body, cap)?.is_none() {
            return Ok(Some(NonQuasiChained { is_constraint: true, index, text: c.to_string() }));
        }
    }
    Ok(None)
}

type Position = (String, usize);

/// Weak acyclicity: the position dependency graph has no cycle through an
/// edge into an existential position.
pub fn is_weakly_acyclic(ontology: &Ontology) -> bool {
    let mut normal: BTreeMap<Position, BTreeSet<Position>> = BTreeMap::new();
    let mut special: Vec<(Position, Position)> = Vec::new();
    for rule in &ontology.rules {
        let mut body_pos: BTreeMap<&str, Vec<Position>> = BTreeMap::new();
        for a in &rule.body {
            for (i, t) in a.args.iter().enumerate() {
                if let Term::Variable(v) = t {
                    body_pos.entry(v).or_default().push((a.relation.clone(), i));
                }
            }
        }
        let exist_pos: Vec<Position> = rule
            .head
            .iter()
            .flat_map(|a| {
                a.args.iter().enumerate().filter_map(move |(i, t)| match t {
                    Term::Variable(v) if rule.evars.contains(v) => Some((a.relation.clone(), i)),
                    _ => None,
                })
            })
            .collect();
        for h in &rule.head {
            for (j, t) in h.args.iter().enumerate() {
                let Term::Variable(v) = t else { continue };
                let Some(sources) = body_pos.get(v.as_str()) else { continue };
                for p in sources {
                    normal.entry(p.clone()).or_default().insert((h.relation.clone(), j));
                    for z in &exist_pos {
                        special.push((p.clone(), z.clone()));
                    }
                }
            }
        }
    }
    let mut all: BTreeMap<Position, BTreeSet<Position>> = normal;
    for (p, z) in &special {
        all.entry(p.clone()).or_default().insert(z.clone());
    }
    // a special edge p -> z lies on a cycle iff z reaches p
    special.iter().all(|(p, z)| !reaches(&all, z, p))
}

fn reaches(graph: &BTreeMap<Position, BTreeSet<Position>>, from: &Position, to: &Position) -> bool {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(p) = queue.pop_front() {
        if &p == to {
            return true;
        }
        if !seen.insert(p.clone()) {
            continue;
        }
        if let Some(next) = graph.get(&p) {
            queue.extend(next.iter().cloned());
        }
    }
    false
}

/// Source of fresh auxiliary relation names `__aux1`, `__aux2`, …
#[derive(Clone, Debug, Default)]
pub struct AuxNamer {
    next: usize,
}

impl AuxNamer {
    pub fn fresh(&mut self) -> String {
        self.next += 1;
        format!("__aux{}", self.next)
    }
}

/// Splits a conjunctive head into one rule producing an auxiliary atom over
/// all head variables and one projection rule per (deduplicated) head atom.
pub fn normalize_single_head(rule: &ExistentialRule, namer: &mut AuxNamer) -> Vec<ExistentialRule> {
    let mut head: Vec<Atom> = Vec::new();
    for a in &rule.head {
        if !head.contains(a) {
            head.push(a.clone());
        }
    }
    if head.len() == 1 {
        return vec![ExistentialRule { body: rule.body.clone(), head, evars: rule.evars.clone() }];
    }
    let aux_args: Vec<Term> = ordered_vars(&head).into_iter().map(Term::Variable).collect();
    let aux = Atom::new(namer.fresh(), aux_args);
    let mut out = vec![ExistentialRule { body: rule.body.clone(), head: vec![aux.clone()], evars: rule.evars.clone() }];
    for h in head {
        out.push(ExistentialRule { body: vec![aux.clone()], head: vec![h], evars: BTreeSet::new() });
    }
    out
}

pub fn normalize_ontology(ontology: &Ontology) -> Ontology {
    let mut namer = AuxNamer::default();
    Ontology {
        rules: ontology.rules.iter().flat_map(|r| normalize_single_head(r, &mut namer)).collect(),
        constraints: ontology.constraints.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn rule(text: &str) -> ExistentialRule {
        parse_program(text).unwrap().ontology.rules.remove(0)
    }

    fn constraint(text: &str) -> NegativeConstraint {
        parse_program(text).unwrap().ontology.constraints.remove(0)
    }

    #[test]
    fn qc_rule3() {
        let r = rule("Wife(X), Married(X,Y) -> Husband(Y).");
        assert_eq!(quasi_chained_order(&r.body, DEFAULT_QC_CAP).unwrap(), Some(vec![0, 1]));
        assert!(is_quasi_chained(StatementRef::Rule(&r)).unwrap());
    }

    #[test]
    fn qc_single_atom() {
        let r = rule("R(X,Y,Z) -> S(X).");
        assert!(is_quasi_chained(StatementRef::Rule(&r)).unwrap());
    }

    #[test]
    fn non_qc_shared_pair() {
        let c = constraint("R1(X,Y), R2(X,Y) -> false.");
        assert!(!is_quasi_chained(StatementRef::Constraint(&c)).unwrap());
    }

    #[test]
    fn qc_needs_reordering() {
        // given order fails (R,T share nothing, then S shares X and Z), but
        // R, S, T works
        let r = rule("R(X,Y), T(Z,W), S(Y,Z) -> U(X).");
        let order = quasi_chained_order(&r.body, DEFAULT_QC_CAP).unwrap().unwrap();
        assert_eq!(order, vec![0, 2, 1]);
    }

    #[test]
    fn qc_cap() {
        let body = (0..9).map(|i| Atom::new(format!("A{i}"), vec![Term::var("X")])).collect::<Vec<_>>();
        assert_eq!(quasi_chained_order(&body, DEFAULT_QC_CAP), Err(QcError::BodyTooLarge(9)));
        assert!(quasi_chained_order(&body, 9).unwrap().is_some());
    }

    #[test]
    fn ontology_violation_names_constraint() {
        let kb = parse_program("A(X) -> B(X).\nR1(X,Y), R2(X,Y) -> false.").unwrap();
        let v = ontology_qc_violation(&kb.ontology, DEFAULT_QC_CAP).unwrap().unwrap();
        assert!(v.is_constraint);
        assert_eq!(v.text, "R1(X,Y), R2(X,Y) -> false");
    }

    #[test]
    fn weak_acyclicity() {
        let ex1 = parse_program(
            "Wife(X), Married(X,Y) -> Husband(Y).\nWife(Y) -> exists X. Husband(X), Married(X,Y).\nHusband(X), Wife(X) -> false.",
        )
        .unwrap();
        assert!(is_weakly_acyclic(&ex1.ontology));
        let datalog = parse_program("E(X,Y) -> T(X,Y).\nT(X,Y), E(Y,Z) -> T(X,Z).").unwrap();
        assert!(is_weakly_acyclic(&datalog.ontology));
        let cyclic = parse_program("R(X) -> exists Y. S(X,Y).\nS(X,Y) -> R(Y).").unwrap();
        assert!(!is_weakly_acyclic(&cyclic.ontology));
    }

    #[test]
    fn normalize_rule4() {
        let r = rule("Wife(Y) -> exists X. Husband(X), Married(X,Y).");
        let mut namer = AuxNamer::default();
        let out = normalize_single_head(&r, &mut namer);
        let text: Vec<String> = out.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            text,
            vec!["Wife(Y) -> exists X. __aux1(X,Y)", "__aux1(X,Y) -> Husband(X)", "__aux1(X,Y) -> Married(X,Y)",]
        );
    }

    #[test]
    fn normalize_identity_and_duplicates() {
        let r = rule("A(X) -> B(X).");
        assert_eq!(normalize_single_head(&r, &mut AuxNamer::default()), vec![r.clone()]);
        let dup = rule("A(X) -> B(X), B(X).");
        assert_eq!(normalize_single_head(&dup, &mut AuxNamer::default()), vec![r]);
        let two = rule("A(X) -> B(X), B(X), C(X).");
        assert_eq!(normalize_single_head(&two, &mut AuxNamer::default()).len(), 3);
    }
}
