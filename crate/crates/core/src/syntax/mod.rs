//! Abstract syntax for existential rules, negative constraints and
//! knowledge bases, together with the text format and structural analyses.

mod analysis;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use analysis::{
    is_quasi_chained, is_weakly_acyclic, normalize_ontology, normalize_single_head, ontology_qc_violation,
    quasi_chained_order, AuxNamer, NonQuasiChained, QcError, StatementRef, DEFAULT_QC_CAP,
};
pub use parser::{parse_program, render_program, ParseError};

/// Relation name → arity.
pub type Signature = BTreeMap<String, usize>;

/// A term: constant, labelled null or variable. The three kinds never mix;
/// nulls only come out of the chase or witness synthesis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Null(u64),
    Variable(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    /// Parses an object name as written in dumps: `_n<k>` is a null,
    /// anything else a constant.
    pub fn parse_object(s: &str) -> Option<Term> {
        if let Some(idx) = s.strip_prefix("_n") {
            return idx.parse().ok().map(Term::Null);
        }
        let mut chars = s.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return None,
        }
        if chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            Some(Term::Constant(s.to_string()))
        } else {
            None
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => f.write_str(c),
            Term::Null(k) => write!(f, "_n{k}"),
            Term::Variable(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { relation: relation.into(), args }
    }

    /// Ground atom over constants, e.g. `Atom::fact("R", &["a", "b"])`.
    pub fn fact(relation: &str, args: &[&str]) -> Self {
        Atom::new(relation, args.iter().map(|a| Term::constant(*a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_variable)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_variable)
    }

    pub fn var_set(&self) -> BTreeSet<&str> {
        self.vars().collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule body is empty")]
    EmptyBody,
    #[error("rule head is empty")]
    EmptyHead,
    #[error("variable {0} occurs in the head but neither in the body nor under exists")]
    VariableOnlyInHeadWithoutExists(String),
    #[error("existential variable {0} also occurs in the body")]
    ExistentialInBody(String),
    #[error("existential variable {0} does not occur in the head")]
    UnusedExistential(String),
    #[error("labelled null {0} inside a rule")]
    NullInRule(String),
}

/// `B1 ∧ … ∧ Bn → ∃Z. H1 ∧ … ∧ Hk`. The head is kept as a conjunction; the
/// single-head form is available through [`normalize_single_head`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExistentialRule {
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    pub evars: BTreeSet<String>,
}

impl ExistentialRule {
    pub fn new(body: Vec<Atom>, head: Vec<Atom>, evars: BTreeSet<String>) -> Result<Self, RuleError> {
        if body.is_empty() {
            return Err(RuleError::EmptyBody);
        }
        if head.is_empty() {
            return Err(RuleError::EmptyHead);
        }
        for t in body.iter().chain(&head).flat_map(|a| &a.args) {
            if t.is_null() {
                return Err(RuleError::NullInRule(t.to_string()));
            }
        }
        let body_vars: BTreeSet<&str> = body.iter().flat_map(|a| a.vars()).collect();
        let head_vars: BTreeSet<&str> = head.iter().flat_map(|a| a.vars()).collect();
        for z in &evars {
            if body_vars.contains(z.as_str()) {
                return Err(RuleError::ExistentialInBody(z.clone()));
            }
            if !head_vars.contains(z.as_str()) {
                return Err(RuleError::UnusedExistential(z.clone()));
            }
        }
        for v in head_vars {
            if !body_vars.contains(v) && !evars.contains(v) {
                return Err(RuleError::VariableOnlyInHeadWithoutExists(v.to_string()));
            }
        }
        Ok(ExistentialRule { body, head, evars })
    }

    pub fn is_datalog(&self) -> bool {
        self.evars.is_empty()
    }

    /// Distinct body variables in order of first occurrence.
    pub fn body_vars(&self) -> Vec<String> {
        ordered_vars(&self.body)
    }

    /// Head variables that also occur in the body, in order of first
    /// occurrence in the head.
    pub fn frontier(&self) -> Vec<String> {
        ordered_vars(&self.head).into_iter().filter(|v| !self.evars.contains(v)).collect()
    }
}

impl fmt::Display for ExistentialRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conj(f, &self.body)?;
        f.write_str(" -> ")?;
        if !self.evars.is_empty() {
            let vars: Vec<&str> = self.evars.iter().map(String::as_str).collect();
            write!(f, "exists {}. ", vars.join(", "))?;
        }
        write_conj(f, &self.head)
    }
}

/// `B1 ∧ … ∧ Bn → ⊥`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NegativeConstraint {
    pub body: Vec<Atom>,
}

impl NegativeConstraint {
    pub fn new(body: Vec<Atom>) -> Result<Self, RuleError> {
        if body.is_empty() {
            return Err(RuleError::EmptyBody);
        }
        if let Some(t) = body.iter().flat_map(|a| &a.args).find(|t| t.is_null()) {
            return Err(RuleError::NullInRule(t.to_string()));
        }
        Ok(NegativeConstraint { body })
    }

    pub fn body_vars(&self) -> Vec<String> {
        ordered_vars(&self.body)
    }
}

impl fmt::Display for NegativeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_conj(f, &self.body)?;
        f.write_str(" -> false")
    }
}

fn write_conj(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

pub(crate) fn ordered_vars(atoms: &[Atom]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for v in atoms.iter().flat_map(|a| a.vars()) {
        if seen.insert(v) {
            out.push(v.to_string());
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    pub rules: Vec<ExistentialRule>,
    pub constraints: Vec<NegativeConstraint>,
}

impl Ontology {
    pub fn is_datalog(&self) -> bool {
        self.rules.iter().all(ExistentialRule::is_datalog)
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        let atoms = self
            .rules
            .iter()
            .flat_map(|r| r.body.iter().chain(&r.head))
            .chain(self.constraints.iter().flat_map(|c| &c.body));
        for a in atoms {
            sig.entry(a.relation.clone()).or_insert(a.arity());
        }
        sig
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub ontology: Ontology,
    pub database: BTreeSet<Atom>,
}

impl KnowledgeBase {
    pub fn new(ontology: Ontology, database: BTreeSet<Atom>) -> Self {
        KnowledgeBase { ontology, database }
    }

    /// Every relation of the ontology and the database with its arity.
    pub fn signature(&self) -> Signature {
        let mut sig = self.ontology.signature();
        for a in &self.database {
            sig.entry(a.relation.clone()).or_insert(a.arity());
        }
        sig
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let atoms = self
            .database
            .iter()
            .chain(self.ontology.rules.iter().flat_map(|r| r.body.iter().chain(&r.head)))
            .chain(self.ontology.constraints.iter().flat_map(|c| &c.body));
        atoms
            .flat_map(|a| &a.args)
            .filter_map(|t| match t {
                Term::Constant(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }
}
