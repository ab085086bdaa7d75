//! Finite model materialization by the restricted chase, plus brute-force
//! model checking and a naive datalog fixpoint used as independent oracles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::syntax::{is_weakly_acyclic, Atom, ExistentialRule, KnowledgeBase, NegativeConstraint, Ontology, Term};

pub const DEFAULT_MAX_STEPS: usize = 100_000;

/// Variable name → ground term.
pub type Substitution = BTreeMap<String, Term>;

/// A finite set of ground atoms over constants and nulls.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Interpretation {
    pub atoms: BTreeSet<Atom>,
}

impl Interpretation {
    pub fn new(atoms: BTreeSet<Atom>) -> Self {
        debug_assert!(atoms.iter().all(Atom::is_ground));
        Interpretation { atoms }
    }

    /// Every term occurring in some atom.
    pub fn objects(&self) -> BTreeSet<Term> {
        self.atoms.iter().flat_map(|a| a.args.iter().cloned()).collect()
    }

    pub fn nulls(&self) -> BTreeSet<u64> {
        self.atoms
            .iter()
            .flat_map(|a| &a.args)
            .filter_map(|t| match t {
                Term::Null(k) => Some(*k),
                _ => None,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(Atom::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChaseResult {
    Model(Interpretation),
    /// A constraint body maps into the materialized atoms.
    Unsatisfiable {
        constraint: usize,
        body: NegativeConstraint,
        grounding: Substitution,
    },
    ResourceExceeded {
        steps: usize,
    },
}

impl ChaseResult {
    pub fn model(&self) -> Option<&Interpretation> {
        match self {
            ChaseResult::Model(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_satisfiable(&self) -> Option<bool> {
        match self {
            ChaseResult::Model(_) => Some(true),
            ChaseResult::Unsatisfiable { .. } => Some(false),
            ChaseResult::ResourceExceeded { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ChaseError {
    #[error("ontology is neither datalog nor weakly acyclic; chase termination is not guaranteed")]
    NotGuaranteedTerminating,
    #[error("ontology contains existential rules")]
    NotDatalog,
}

/// Atoms grouped by relation for join evaluation.
pub(crate) struct AtomIndex<'a> {
    by_rel: HashMap<&'a str, Vec<&'a Atom>>,
}

impl<'a> AtomIndex<'a> {
    pub(crate) fn new(atoms: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut by_rel: HashMap<&str, Vec<&Atom>> = HashMap::new();
        for a in atoms {
            by_rel.entry(a.relation.as_str()).or_default().push(a);
        }
        AtomIndex { by_rel }
    }

    fn facts(&self, rel: &str) -> &[&'a Atom] {
        self.by_rel.get(rel).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Binds the variables of `pattern` against `fact`; returns the newly bound
/// names so the caller can undo them.
fn match_atom(pattern: &Atom, fact: &Atom, sub: &mut Substitution) -> Option<Vec<String>> {
    if pattern.relation != fact.relation || pattern.args.len() != fact.args.len() {
        return None;
    }
    let mut bound = Vec::new();
    for (p, t) in pattern.args.iter().zip(&fact.args) {
        let ok = match p {
            Term::Variable(v) => match sub.get(v) {
                Some(x) => x == t,
                None => {
                    sub.insert(v.clone(), t.clone());
                    bound.push(v.clone());
                    true
                }
            },
            _ => p == t,
        };
        if !ok {
            for v in &bound {
                sub.remove(v);
            }
            return None;
        }
    }
    Some(bound)
}

/// Reorders a conjunction so that each atom shares variables with the prefix
/// whenever possible, which keeps intermediate joins small.
fn join_order(atoms: &[Atom], prebound: &BTreeSet<String>) -> Vec<usize> {
    let mut bound = prebound.clone();
    let mut left: Vec<usize> = (0..atoms.len()).collect();
    let mut order = Vec::with_capacity(atoms.len());
    while !left.is_empty() {
        let pick = left
            .iter()
            .enumerate()
            .max_by_key(|(pos, &i)| {
                let shared = atoms[i].vars().filter(|v| bound.contains(*v)).count();
                (shared, std::cmp::Reverse(*pos))
            })
            .map(|(pos, _)| pos)
            .unwrap();
        let i = left.remove(pick);
        bound.extend(atoms[i].vars().map(str::to_string));
        order.push(i);
    }
    order
}

/// Calls `visit` on every extension of `sub` mapping `atoms` into `index`.
/// Stops early when `visit` returns `false`; returns whether it stopped.
pub(crate) fn for_each_homomorphism(
    atoms: &[Atom],
    index: &AtomIndex<'_>,
    sub: &Substitution,
    visit: &mut dyn FnMut(&Substitution) -> bool,
) -> bool {
    let prebound: BTreeSet<String> = sub.keys().cloned().collect();
    let order: Vec<&Atom> = join_order(atoms, &prebound).into_iter().map(|i| &atoms[i]).collect();
    let mut work = sub.clone();
    search(&order, index, &mut work, visit)
}

fn search(
    atoms: &[&Atom],
    index: &AtomIndex<'_>,
    sub: &mut Substitution,
    visit: &mut dyn FnMut(&Substitution) -> bool,
) -> bool {
    let Some((first, rest)) = atoms.split_first() else {
        return !visit(sub);
    };
    for fact in index.facts(&first.relation) {
        if let Some(bound) = match_atom(first, fact, sub) {
            let stop = search(rest, index, sub, visit);
            for v in &bound {
                sub.remove(v);
            }
            if stop {
                return true;
            }
        }
    }
    false
}

pub(crate) fn all_homomorphisms(atoms: &[Atom], index: &AtomIndex<'_>) -> Vec<Substitution> {
    let mut out = Vec::new();
    for_each_homomorphism(atoms, index, &Substitution::new(), &mut |s| {
        out.push(s.clone());
        true
    });
    out
}

pub(crate) fn has_extension(atoms: &[Atom], index: &AtomIndex<'_>, sub: &Substitution) -> bool {
    for_each_homomorphism(atoms, index, sub, &mut |_| false)
}

pub fn substitute(atom: &Atom, sub: &Substitution) -> Atom {
    let args = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Variable(v) => sub.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        })
        .collect();
    Atom::new(atom.relation.clone(), args)
}

fn sort_key(sub: &Substitution, vars: &[String]) -> Vec<Term> {
    vars.iter().map(|v| sub[v].clone()).collect()
}

fn first_violation(constraints: &[NegativeConstraint], index: &AtomIndex<'_>) -> Option<ChaseResult> {
    for (i, c) in constraints.iter().enumerate() {
        let vars = c.body_vars();
        let mut homs = all_homomorphisms(&c.body, index);
        homs.sort_by_key(|s| sort_key(s, &vars));
        if let Some(g) = homs.into_iter().next() {
            return Some(ChaseResult::Unsatisfiable { constraint: i, body: c.clone(), grounding: g });
        }
    }
    None
}

/// Restricted chase of `(Σ, D)`. Requires a datalog or weakly acyclic
/// ontology.
pub fn chase(kb: &KnowledgeBase, max_steps: usize) -> Result<ChaseResult, ChaseError> {
    chase_from(&kb.ontology, Interpretation::new(kb.database.clone()), max_steps)
}

/// Restricted chase starting from an arbitrary ground instance, which may
/// already contain nulls. Fresh nulls continue after the largest index
/// present.
pub fn chase_from(ontology: &Ontology, initial: Interpretation, max_steps: usize) -> Result<ChaseResult, ChaseError> {
    if !ontology.is_datalog() && !is_weakly_acyclic(ontology) {
        return Err(ChaseError::NotGuaranteedTerminating);
    }
    let mut next_null = initial.nulls().last().copied().unwrap_or(0) + 1;
    let mut atoms = initial.atoms;
    let mut steps = 0usize;
    let rule_vars: Vec<Vec<String>> = ontology.rules.iter().map(ExistentialRule::body_vars).collect();
    loop {
        if let Some(v) = first_violation(&ontology.constraints, &AtomIndex::new(&atoms)) {
            return Ok(v);
        }
        let mut fired = false;
        for (rule, vars) in ontology.rules.iter().zip(&rule_vars) {
            let mut homs = all_homomorphisms(&rule.body, &AtomIndex::new(&atoms));
            homs.sort_by_key(|s| sort_key(s, vars));
            homs.dedup();
            for h in homs {
                let satisfied = if rule.is_datalog() {
                    rule.head.iter().all(|a| atoms.contains(&substitute(a, &h)))
                } else {
                    has_extension(&rule.head, &AtomIndex::new(&atoms), &h)
                };
                if satisfied {
                    continue;
                }
                if steps == max_steps {
                    return Ok(ChaseResult::ResourceExceeded { steps });
                }
                steps += 1;
                let mut ext = h;
                for z in &rule.evars {
                    ext.insert(z.clone(), Term::Null(next_null));
                    next_null += 1;
                }
                for a in &rule.head {
                    atoms.insert(substitute(a, &ext));
                }
                fired = true;
            }
        }
        if !fired {
            return Ok(ChaseResult::Model(Interpretation::new(atoms)));
        }
    }
}

/// Why an interpretation fails to be a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelViolation {
    MissingFact(Atom),
    RuleUnsatisfied { rule: usize, grounding: Substitution },
    ConstraintViolated { constraint: usize, grounding: Substitution },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::MissingFact(a) => write!(f, "database fact {a} missing"),
            ModelViolation::RuleUnsatisfied { rule, grounding } => {
                write!(f, "rule {rule} has an unsatisfied body match {}", show_sub(grounding))
            }
            ModelViolation::ConstraintViolated { constraint, grounding } => {
                write!(f, "constraint {constraint} body matches {}", show_sub(grounding))
            }
        }
    }
}

pub fn show_sub(sub: &Substitution) -> String {
    let parts: Vec<String> = sub.iter().map(|(v, t)| format!("{v}->{t}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Enumerates every assignment of `vars` over `domain`, pruning as soon as
/// an atom whose variables are all assigned fails `holds`.
fn brute_force_assignments(
    vars: &[String],
    domain: &[Term],
    atoms: &[Atom],
    holds: &dyn Fn(&Atom) -> bool,
    visit: &mut dyn FnMut(&Substitution) -> bool,
) {
    // atoms become checkable once their last variable (in `vars` order) is set
    let mut ready: Vec<Vec<&Atom>> = vec![Vec::new(); vars.len() + 1];
    for a in atoms {
        let last = a.vars().map(|v| vars.iter().position(|x| x == v).unwrap() + 1).max().unwrap_or(0);
        ready[last].push(a);
    }
    if !ready[0].iter().all(|a| holds(a)) {
        return;
    }
    let mut sub = Substitution::new();
    assign(0, vars, domain, &ready, holds, &mut sub, visit);
}

fn assign(
    depth: usize,
    vars: &[String],
    domain: &[Term],
    ready: &[Vec<&Atom>],
    holds: &dyn Fn(&Atom) -> bool,
    sub: &mut Substitution,
    visit: &mut dyn FnMut(&Substitution) -> bool,
) -> bool {
    if depth == vars.len() {
        return !visit(sub);
    }
    for o in domain {
        sub.insert(vars[depth].clone(), o.clone());
        if ready[depth + 1].iter().all(|a| holds(&substitute(a, sub)))
            && assign(depth + 1, vars, domain, ready, holds, sub, visit)
        {
            return true;
        }
    }
    sub.remove(&vars[depth]);
    false
}

/// First reason `interp` is not a model of `kb`, by exhaustive assignment
/// search over the objects of `interp` and the constants of `kb`.
pub fn model_violation(interp: &Interpretation, kb: &KnowledgeBase) -> Option<ModelViolation> {
    if let Some(a) = kb.database.iter().find(|a| !interp.contains(a)) {
        return Some(ModelViolation::MissingFact(a.clone()));
    }
    let mut domain: BTreeSet<Term> = interp.objects();
    domain.extend(kb.constants().into_iter().map(Term::Constant));
    let domain: Vec<Term> = domain.into_iter().collect();
    let holds = |a: &Atom| interp.contains(a);
    for (i, c) in kb.ontology.constraints.iter().enumerate() {
        let mut found = None;
        brute_force_assignments(&c.body_vars(), &domain, &c.body, &holds, &mut |s| {
            found = Some(s.clone());
            false
        });
        if let Some(g) = found {
            return Some(ModelViolation::ConstraintViolated { constraint: i, grounding: g });
        }
    }
    for (i, r) in kb.ontology.rules.iter().enumerate() {
        let evars: Vec<String> = r.evars.iter().cloned().collect();
        let mut found = None;
        brute_force_assignments(&r.body_vars(), &domain, &r.body, &holds, &mut |s| {
            let head: Vec<Atom> = r.head.iter().map(|a| substitute(a, s)).collect();
            let mut witnessed = false;
            brute_force_assignments(&evars, &domain, &head, &holds, &mut |_| {
                witnessed = true;
                false
            });
            if witnessed {
                true
            } else {
                found = Some(s.clone());
                false
            }
        });
        if let Some(g) = found {
            return Some(ModelViolation::RuleUnsatisfied { rule: i, grounding: g });
        }
    }
    None
}

pub fn is_model(interp: &Interpretation, kb: &KnowledgeBase) -> bool {
    model_violation(interp, kb).is_none()
}

/// Least model of a datalog KB by naive bottom-up iteration over the active
/// domain. Shares no evaluation code with [`chase`].
pub fn datalog_fixpoint(kb: &KnowledgeBase) -> Result<ChaseResult, ChaseError> {
    if !kb.ontology.is_datalog() {
        return Err(ChaseError::NotDatalog);
    }
    let domain: Vec<Term> = kb.constants().into_iter().map(Term::Constant).collect();
    let mut atoms = kb.database.clone();
    loop {
        let mut derived = BTreeSet::new();
        for r in &kb.ontology.rules {
            let holds = |a: &Atom| atoms.contains(a);
            brute_force_assignments(&r.body_vars(), &domain, &r.body, &holds, &mut |s| {
                for h in &r.head {
                    derived.insert(substitute(h, s));
                }
                true
            });
        }
        let before = atoms.len();
        atoms.extend(derived);
        if atoms.len() == before {
            break;
        }
    }
    let holds = |a: &Atom| atoms.contains(a);
    for (i, c) in kb.ontology.constraints.iter().enumerate() {
        let mut found = None;
        brute_force_assignments(&c.body_vars(), &domain, &c.body, &holds, &mut |s| {
            found = Some(s.clone());
            false
        });
        if let Some(g) = found {
            return Ok(ChaseResult::Unsatisfiable { constraint: i, body: c.clone(), grounding: g });
        }
    }
    Ok(ChaseResult::Model(Interpretation::new(atoms)))
}

/// Treats the nulls of `from` as variables and searches for a mapping into
/// `to` that fixes constants. With `injective_on_nulls`, nulls must map to
/// pairwise distinct nulls.
pub fn find_homomorphism(
    from: &Interpretation,
    to: &Interpretation,
    injective_on_nulls: bool,
) -> Option<BTreeMap<u64, Term>> {
    let pattern: Vec<Atom> = from
        .atoms
        .iter()
        .map(|a| {
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Null(k) => Term::Variable(format!("_{k}")),
                    _ => t.clone(),
                })
                .collect();
            Atom::new(a.relation.clone(), args)
        })
        .collect();
    let index = AtomIndex::new(&to.atoms);
    let mut result = None;
    for_each_homomorphism(&pattern, &index, &Substitution::new(), &mut |s| {
        if injective_on_nulls {
            let images: BTreeSet<&Term> = s.values().collect();
            if images.len() != s.len() || images.iter().any(|t| !t.is_null()) {
                return true;
            }
        }
        result = Some(s.iter().map(|(v, t)| (v[1..].parse().unwrap(), t.clone())).collect());
        false
    });
    result
}

/// Equality up to a bijective renaming of nulls.
pub fn isomorphic_up_to_nulls(a: &Interpretation, b: &Interpretation) -> bool {
    a.len() == b.len() && a.nulls().len() == b.nulls().len() && find_homomorphism(a, b, true).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const MARRIED: &str = "\
Wife(X), Married(X,Y) -> Husband(Y).
Wife(Y) -> exists X. Husband(X), Married(X,Y).
Husband(X), Wife(X) -> false.
Wife(anna). Wife(marie).
";

    fn atoms(text: &str) -> Interpretation {
        text.split_whitespace()
            .map(|s| {
                let (rel, rest) = s.split_once('(').unwrap();
                let args = rest.trim_end_matches(')').split(',').map(|x| Term::parse_object(x).unwrap()).collect();
                Atom::new(rel, args)
            })
            .collect()
    }

    #[test]
    fn married_model() {
        let kb = parse_program(MARRIED).unwrap();
        let res = chase(&kb, DEFAULT_MAX_STEPS).unwrap();
        let m = res.model().unwrap();
        let expected = atoms("Wife(anna) Wife(marie) Husband(_n7) Married(_n7,anna) Husband(_n9) Married(_n9,marie)");
        assert!(isomorphic_up_to_nulls(m, &expected));
        // creation order fixes the exact names
        assert!(m.contains(&atoms("Married(_n1,anna)").atoms.into_iter().next().unwrap()));
        assert!(is_model(m, &kb));
    }

    #[test]
    fn constraint_violation() {
        let kb = parse_program("Husband(X), Wife(X) -> false.\nHusband(a). Wife(a).").unwrap();
        match chase(&kb, DEFAULT_MAX_STEPS).unwrap() {
            ChaseResult::Unsatisfiable { constraint, grounding, .. } => {
                assert_eq!(constraint, 0);
                assert_eq!(grounding["X"], Term::constant("a"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_ontology() {
        let kb = parse_program("R(a,b).").unwrap();
        assert_eq!(chase(&kb, 10).unwrap(), ChaseResult::Model(Interpretation::new(kb.database.clone())));
        assert!(is_model(&Interpretation::default(), &KnowledgeBase::default()));
    }

    #[test]
    fn non_model_detected() {
        let kb = parse_program(MARRIED).unwrap();
        let i = atoms("Married(anna,marie) Husband(marie) Wife(anna) Wife(marie)");
        assert!(matches!(model_violation(&i, &kb), Some(ModelViolation::ConstraintViolated { .. })));
        let missing = atoms("Wife(anna)");
        assert!(matches!(model_violation(&missing, &kb), Some(ModelViolation::MissingFact(_))));
    }

    #[test]
    fn refuses_non_terminating() {
        let kb = parse_program("R(X) -> exists Y. S(X,Y).\nS(X,Y) -> R(Y).\nR(a).").unwrap();
        assert_eq!(chase(&kb, 10), Err(ChaseError::NotGuaranteedTerminating));
    }

    #[test]
    fn resource_limit() {
        let kb = parse_program("E(X,Y) -> T(X,Y).\nT(X,Y), E(Y,Z) -> T(X,Z).\nE(a,b). E(b,c). E(c,d).").unwrap();
        assert_eq!(chase(&kb, 2).unwrap(), ChaseResult::ResourceExceeded { steps: 2 });
    }

    #[test]
    fn fixpoint_oracle() {
        let kb = parse_program("R(X,Y) -> S(X,Y).\nR(a,b).").unwrap();
        let m = datalog_fixpoint(&kb).unwrap();
        assert_eq!(m.model().unwrap(), &atoms("R(a,b) S(a,b)"));
        let tc =
            parse_program("E(X,Y) -> T(X,Y).\nT(X,Y), E(Y,Z) -> T(X,Z).\nE(a,b). E(b,c). E(c,d). E(d,a).").unwrap();
        let fix = datalog_fixpoint(&tc).unwrap();
        let t_atoms = fix.model().unwrap().iter().filter(|a| a.relation == "T").count();
        assert_eq!(t_atoms, 16);
        assert_eq!(chase(&tc, DEFAULT_MAX_STEPS).unwrap(), fix);
        let ex = parse_program(MARRIED).unwrap();
        assert_eq!(datalog_fixpoint(&ex), Err(ChaseError::NotDatalog));
    }

    #[test]
    fn initial_nulls_are_respected() {
        let kb = parse_program("Wife(Y) -> exists X. Married(X,Y).").unwrap();
        let init = atoms("Wife(_n4)");
        let res = chase_from(&kb.ontology, init, 10).unwrap();
        assert_eq!(res.model().unwrap(), &atoms("Wife(_n4) Married(_n5,_n4)"));
    }

    #[test]
    fn homomorphisms_between_models() {
        let a = atoms("R(a,_n1) S(_n1)");
        let b = atoms("R(a,_n2) S(_n2) S(a)");
        assert!(find_homomorphism(&a, &b, false).is_some());
        assert!(!isomorphic_up_to_nulls(&a, &b));
        let c = atoms("R(a,a) S(a)");
        assert!(find_homomorphism(&a, &c, false).is_some());
        assert!(find_homomorphism(&a, &c, true).is_none());
    }
}
