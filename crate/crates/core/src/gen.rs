//! Random knowledge bases for property tests and the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chase::{chase, ChaseResult, Interpretation};
use crate::syntax::{
    is_weakly_acyclic, ontology_qc_violation, Atom, ExistentialRule, KnowledgeBase, NegativeConstraint, Ontology,
    Signature, Term, DEFAULT_QC_CAP,
};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_relations: usize,
    pub max_arity: usize,
    pub max_constants: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_facts: usize,
    /// Chance that a head position holds an existential variable.
    pub existential_rate: f64,
    pub constraint_rate: f64,
    /// Rejection bounds on the materialized model.
    pub max_model_objects: usize,
    pub max_facts_per_relation: usize,
    pub max_steps: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_relations: 5,
            max_arity: 3,
            max_constants: 8,
            max_rules: 6,
            max_body: 3,
            max_facts: 10,
            existential_rate: 0.25,
            constraint_rate: 0.3,
            max_model_objects: 24,
            max_facts_per_relation: 24,
            max_steps: 5_000,
        }
    }
}

fn signature(rng: &mut impl Rng, cfg: &GenConfig) -> Signature {
    let k = rng.gen_range(2..=cfg.max_relations.max(2));
    (1..=k).map(|i| (format!("R{i}"), rng.gen_range(1..=cfg.max_arity))).collect()
}

fn pick_relation<'a>(rng: &mut impl Rng, sig: &'a Signature) -> (&'a String, usize) {
    let rels: Vec<(&String, &usize)> = sig.iter().collect();
    let (r, k) = rels[rng.gen_range(0..rels.len())];
    (r, *k)
}

struct VarPool(usize);

impl VarPool {
    fn fresh(&mut self) -> String {
        self.0 += 1;
        format!("X{}", self.0)
    }
}

/// Each atom after the first shares at most one variable with the atoms
/// before it, so the body is quasi-chained in generation order.
fn qc_body(rng: &mut impl Rng, sig: &Signature, len: usize, pool: &mut VarPool) -> Vec<Atom> {
    let mut seen: Vec<String> = Vec::new();
    let mut body = Vec::with_capacity(len);
    for i in 0..len {
        let (rel, k) = pick_relation(rng, sig);
        let shared_pos = (i > 0 && !seen.is_empty() && rng.gen_bool(0.8)).then(|| rng.gen_range(0..k));
        let shared = shared_pos.map(|_| seen.choose(rng).unwrap().clone());
        let mut args: Vec<String> = Vec::with_capacity(k);
        for p in 0..k {
            if Some(p) == shared_pos {
                args.push(shared.clone().unwrap());
            } else if p > 0 && rng.gen_bool(0.1) {
                // repeat a variable local to this atom
                let local: Vec<String> = args.iter().filter(|a| Some(*a) != shared.as_ref()).cloned().collect();
                match local.choose(rng) {
                    Some(v) => args.push(v.clone()),
                    None => args.push(pool.fresh()),
                }
            } else {
                args.push(pool.fresh());
            }
        }
        for a in &args {
            if !seen.contains(a) {
                seen.push(a.clone());
            }
        }
        body.push(Atom::new(rel.clone(), args.into_iter().map(Term::Variable).collect()));
    }
    body
}

/// Body atoms with arbitrary sharing and occasional constants.
fn free_body(rng: &mut impl Rng, sig: &Signature, len: usize, constants: &[String], pool: &mut VarPool) -> Vec<Atom> {
    let mut seen: Vec<String> = Vec::new();
    (0..len)
        .map(|_| {
            let (rel, k) = pick_relation(rng, sig);
            let args = (0..k)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        return Term::constant(constants.choose(rng).unwrap().clone());
                    }
                    let v = match seen.choose(rng) {
                        Some(v) if rng.gen_bool(0.5) => v.clone(),
                        _ => pool.fresh(),
                    };
                    if !seen.contains(&v) {
                        seen.push(v.clone());
                    }
                    Term::Variable(v)
                })
                .collect();
            Atom::new(rel.clone(), args)
        })
        .collect()
}

fn head(rng: &mut impl Rng, sig: &Signature, body: &[Atom], existential_rate: f64) -> (Vec<Atom>, BTreeSet<String>) {
    let body_vars: Vec<String> = crate::syntax::ordered_vars(body);
    let mut evars = BTreeSet::new();
    let atoms = if rng.gen_bool(0.2) { 2 } else { 1 };
    let mut zs: Vec<String> = Vec::new();
    let head = (0..atoms)
        .map(|_| {
            let (rel, k) = pick_relation(rng, sig);
            let args = (0..k)
                .map(|_| {
                    if rng.gen_bool(existential_rate) || body_vars.is_empty() {
                        let z = match zs.choose(rng) {
                            Some(z) if rng.gen_bool(0.3) => z.clone(),
                            _ => {
                                let z = format!("Z{}", zs.len() + 1);
                                zs.push(z.clone());
                                z
                            }
                        };
                        evars.insert(z.clone());
                        Term::Variable(z)
                    } else {
                        Term::Variable(body_vars.choose(rng).unwrap().clone())
                    }
                })
                .collect();
            Atom::new(rel.clone(), args)
        })
        .collect();
    (head, evars)
}

fn database(rng: &mut impl Rng, sig: &Signature, constants: &[String], max_facts: usize) -> BTreeSet<Atom> {
    let n = rng.gen_range(1..=max_facts.max(1));
    (0..n)
        .map(|_| {
            let (rel, k) = pick_relation(rng, sig);
            Atom::new(rel.clone(), (0..k).map(|_| Term::constant(constants.choose(rng).unwrap().clone())).collect())
        })
        .collect()
}

fn constants(rng: &mut impl Rng, cfg: &GenConfig) -> Vec<String> {
    (1..=rng.gen_range(1..=cfg.max_constants.max(1))).map(|i| format!("c{i}")).collect()
}

/// A quasi-chained, weakly acyclic knowledge base with a finite model, and
/// that model.
#[derive(Clone, Debug)]
pub struct GeneratedKb {
    pub kb: KnowledgeBase,
    pub model: Interpretation,
}

fn model_fits(m: &Interpretation, cfg: &GenConfig) -> bool {
    if m.objects().len() > cfg.max_model_objects {
        return false;
    }
    let mut per_rel: BTreeMap<&str, usize> = BTreeMap::new();
    for a in m.iter() {
        *per_rel.entry(a.relation.as_str()).or_default() += 1;
    }
    per_rel.values().all(|&c| c <= cfg.max_facts_per_relation)
}

/// Rejection-samples until the ontology is quasi-chained and weakly acyclic
/// and its chase yields a model within the configured bounds.
pub fn random_qc_kb(rng: &mut impl Rng, cfg: &GenConfig) -> GeneratedKb {
    loop {
        let sig = signature(rng, cfg);
        let consts = constants(rng, cfg);
        let mut pool = VarPool(0);
        let mut rules = Vec::new();
        for _ in 0..rng.gen_range(1..=cfg.max_rules.max(1)) {
            let len = rng.gen_range(1..=cfg.max_body);
            let body = qc_body(rng, &sig, len, &mut pool);
            let (h, evars) = head(rng, &sig, &body, cfg.existential_rate);
            rules.push(ExistentialRule::new(body, h, evars).expect("well-formed by construction"));
        }
        let mut constraints = Vec::new();
        if rng.gen_bool(cfg.constraint_rate) {
            let len = rng.gen_range(1..=2);
            let body = qc_body(rng, &sig, len, &mut pool);
            constraints.push(NegativeConstraint::new(body).expect("nonempty"));
        }
        let ontology = Ontology { rules, constraints };
        if !is_weakly_acyclic(&ontology) || !matches!(ontology_qc_violation(&ontology, DEFAULT_QC_CAP), Ok(None)) {
            continue;
        }
        let kb = KnowledgeBase::new(ontology, database(rng, &sig, &consts, cfg.max_facts));
        if let Ok(ChaseResult::Model(model)) = chase(&kb, cfg.max_steps) {
            if model_fits(&model, cfg) {
                return GeneratedKb { kb, model };
            }
        }
    }
}

/// A datalog knowledge base without the quasi-chained restriction. Bodies
/// may share variables freely and mention constants.
pub fn random_datalog_kb(rng: &mut impl Rng, cfg: &GenConfig) -> KnowledgeBase {
    let sig = signature(rng, cfg);
    let consts = constants(rng, cfg);
    let mut pool = VarPool(0);
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(1..=cfg.max_rules.max(1)) {
        let len = rng.gen_range(1..=cfg.max_body);
        let body = free_body(rng, &sig, len, &consts, &mut pool);
        let (mut h, _) = head(rng, &sig, &body, 0.0);
        if crate::syntax::ordered_vars(&body).is_empty() {
            // ground body: keep the head ground as well
            for a in &mut h {
                for t in &mut a.args {
                    *t = Term::constant(consts.choose(rng).unwrap().clone());
                }
            }
        }
        rules.push(ExistentialRule::new(body, h, BTreeSet::new()).expect("datalog by construction"));
    }
    let mut constraints = Vec::new();
    if rng.gen_bool(cfg.constraint_rate / 2.0) {
        let len = rng.gen_range(1..=2);
        let body = free_body(rng, &sig, len, &consts, &mut pool);
        constraints.push(NegativeConstraint::new(body).expect("nonempty"));
    }
    KnowledgeBase::new(Ontology { rules, constraints }, database(rng, &sig, &consts, cfg.max_facts))
}
