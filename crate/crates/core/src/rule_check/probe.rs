use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chase::{chase_from, substitute, ChaseError, ChaseResult, Interpretation, DEFAULT_MAX_STEPS};
use crate::geometry::{combination, synthesize_null_witnesses, GeometricInterpretation, Point, DEFAULT_MAX_ROUNDS};
use crate::rational::Q;
use crate::syntax::{Atom, KnowledgeBase, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Half box-uniform, half convex combinations of 1 to 3 entities.
    Mixture,
    /// Midpoint of two distinct entities.
    Midpoint,
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub max_steps: usize,
    pub max_rounds: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            points: 3,
            trials: 20,
            seed: 0,
            sampler: Sampler::Mixture,
            max_steps: DEFAULT_MAX_STEPS,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub points: BTreeMap<String, Point>,
    /// `None` when the chase ran out of steps or could not run.
    pub satisfiable: Option<bool>,
    /// Whether D ∪ φ is already closed under the rules and constraints.
    pub phi_is_model: bool,
    /// The violated constraint, if any.
    pub violation: Option<String>,
    /// Ground body atoms of the violated constraint.
    pub witness_atoms: Vec<String>,
    pub error: Option<String>,
    /// The extended fact set handed to the chase.
    #[serde(skip)]
    pub facts: BTreeSet<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub trials: usize,
    pub records: Vec<TrialRecord>,
}

impl ProbeReport {
    pub fn violations(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.satisfiable == Some(false))
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn all_satisfiable(&self) -> bool {
        self.records.iter().all(|r| r.satisfiable == Some(true))
    }
}

fn exp_weight(rng: &mut ChaCha8Rng) -> BigInt {
    let u: f64 = rng.gen();
    let e = -(1.0 - u).ln();
    BigInt::from((e * 1000.0).round() as i64 + 1)
}

fn sample_point(rng: &mut ChaCha8Rng, pts: &[&Point], lo: &[Q], hi: &[Q], sampler: Sampler) -> Point {
    match sampler {
        Sampler::Midpoint => {
            if pts.len() < 2 {
                return pts[0].clone();
            }
            let idx = sample(rng, pts.len(), 2);
            let half = Q::new(1.into(), 2.into());
            combination(&[half.clone(), half], &[pts[idx.index(0)], pts[idx.index(1)]])
        }
        Sampler::Mixture if rng.gen_bool(0.5) => {
            let coords = lo
                .iter()
                .zip(hi)
                .map(|(l, h)| {
                    let k: i64 = rng.gen_range(0..=16);
                    l + (h - l) * Q::new(k.into(), 16.into())
                })
                .collect();
            Point::new(coords)
        }
        Sampler::Mixture => {
            let k = rng.gen_range(1..=3.min(pts.len()));
            let idx = sample(rng, pts.len(), k);
            let raw: Vec<BigInt> = (0..k).map(|_| exp_weight(rng)).collect();
            let total: BigInt = raw.iter().sum();
            let w: Vec<Q> = raw.into_iter().map(|r| Q::new(r, total.clone())).collect();
            let chosen: Vec<&Point> = idx.iter().map(|i| pts[i]).collect();
            combination(&w, &chosen)
        }
    }
}

/// Randomized test of the extension condition: add sampled points as new
/// constants, add witnesses for existential demands, and chase the facts
/// that hold in the extension together with the database.
pub fn probe_extension(
    eta: &GeometricInterpretation,
    kb: &KnowledgeBase,
    config: &ProbeConfig,
) -> Result<ProbeReport, ChaseError> {
    let empty = ProbeReport { seed: config.seed, trials: config.trials, records: Vec::new() };
    if config.trials == 0 {
        return Ok(empty);
    }
    // surface termination problems once instead of per trial
    chase_from(&kb.ontology, Interpretation::default(), 0)?;
    let pts: Vec<&Point> = eta.entities().values().collect();
    let m = eta.m();
    let (lo, hi): (Vec<Q>, Vec<Q>) = (0..m)
        .map(|c| {
            let col = pts.iter().map(|p| &p.coords[c]);
            let lo = col.clone().min().cloned().unwrap_or_else(Q::zero);
            let hi = col.max().cloned().unwrap_or_else(Q::one);
            (lo, hi)
        })
        .unzip();
    let base_phi = eta.phi_all();
    let existential = kb.ontology.rules.iter().any(|r| !r.is_datalog());
    let taken: BTreeSet<Term> = eta.objects();
    let mut names = Vec::with_capacity(config.points);
    let mut i = 0;
    while names.len() < config.points {
        let t = Term::constant(format!("pt{i}"));
        if !taken.contains(&t) && !kb.constants().contains(&format!("pt{i}")) {
            names.push(t);
        }
        i += 1;
    }

    let records = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial as u64);
            let points: BTreeMap<Term, Point> = if pts.is_empty() {
                BTreeMap::new()
            } else {
                names.iter().map(|n| (n.clone(), sample_point(&mut rng, &pts, &lo, &hi, config.sampler))).collect()
            };
            let mut rec = TrialRecord {
                trial,
                points: points.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
                satisfiable: None,
                phi_is_model: false,
                violation: None,
                witness_atoms: Vec::new(),
                error: None,
                facts: BTreeSet::new(),
            };
            let mut ext = eta.extend_with_points(&points).expect("fresh names in dimension m");
            if existential {
                match synthesize_null_witnesses(&ext, kb, config.max_rounds) {
                    Ok(full) => ext = full,
                    Err(e) => rec.error = Some(e.to_string()),
                }
            }
            let fresh: BTreeSet<Term> = ext.objects().difference(&taken).cloned().collect();
            let mut facts = base_phi.clone();
            facts.extend(ext.phi_touching(&ext.objects(), Some(&fresh)).expect("own objects"));
            facts.extend(kb.database.iter().cloned());
            let input = Interpretation::new(facts.clone());
            rec.facts = facts;
            match chase_from(&kb.ontology, input.clone(), config.max_steps) {
                Ok(ChaseResult::Model(out)) => {
                    rec.satisfiable = Some(true);
                    rec.phi_is_model = out == input;
                }
                Ok(ChaseResult::Unsatisfiable { constraint, body, grounding }) => {
                    rec.satisfiable = Some(false);
                    rec.violation = Some(format!("constraint {constraint}: {body}"));
                    rec.witness_atoms = body.body.iter().map(|a| substitute(a, &grounding).to_string()).collect();
                }
                Ok(ChaseResult::ResourceExceeded { steps }) => {
                    rec.error.get_or_insert(format!("chase stopped after {steps} steps"));
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();
    Ok(ProbeReport { records, ..empty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::{chase, is_model};
    use crate::geometry::build_prop3_model;
    use crate::rational::frac;
    use crate::syntax::parse_program;

    fn one_hot(src: &str) -> (KnowledgeBase, GeometricInterpretation) {
        let kb = parse_program(src).unwrap();
        let m = chase(&kb, DEFAULT_MAX_STEPS).unwrap().model().unwrap().clone();
        let eta = build_prop3_model(&m, &kb.signature());
        (kb, eta)
    }

    #[test]
    fn married_never_violated() {
        let (kb, eta) = one_hot(
            "Wife(X), Married(X,Y) -> Husband(Y).\nWife(Y) -> exists X. Husband(X), Married(X,Y).\nHusband(X), Wife(X) -> false.\nWife(anna). Wife(marie).",
        );
        let cfg = ProbeConfig { trials: 30, points: 3, seed: 7, ..Default::default() };
        let report = probe_extension(&eta, &kb, &cfg).unwrap();
        assert_eq!(report.records.len(), 30);
        assert!(report.all_satisfiable(), "{:?}", report.violations().next());
        assert!(report.records.iter().all(|r| r.error.is_none()));
        // deterministic given the seed
        assert_eq!(probe_extension(&eta, &kb, &cfg).unwrap(), report);
        let other = probe_extension(&eta, &kb, &ProbeConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(other.records[0].points, report.records[0].points);
    }

    #[test]
    fn nonchained_midpoint_violation() {
        let (kb, eta) = one_hot("R1(X,Y), R2(X,Y) -> false.\nR1(a1,a1). R1(a2,a2). R2(a1,a2). R2(a2,a1).");
        let cfg = ProbeConfig { trials: 5, points: 1, sampler: Sampler::Midpoint, ..Default::default() };
        let report = probe_extension(&eta, &kb, &cfg).unwrap();
        assert_eq!(report.violation_count(), 5);
        let v = report.violations().next().unwrap();
        assert_eq!(v.points["pt0"], Point::new(vec![frac(1, 2), frac(1, 2)]));
        assert_eq!(v.witness_atoms, vec!["R1(pt0,pt0)", "R2(pt0,pt0)"]);
        let kb2 = KnowledgeBase::new(kb.ontology.clone(), v.facts.clone());
        assert!(!is_model(&Interpretation::new(v.facts.clone()), &kb2));
    }

    #[test]
    fn zero_trials() {
        let (kb, eta) = one_hot("A(a).");
        let report = probe_extension(&eta, &kb, &ProbeConfig { trials: 0, ..Default::default() }).unwrap();
        assert!(report.records.is_empty());
        assert!(report.all_satisfiable());
    }

    #[test]
    fn fresh_names_avoid_constants() {
        let (kb, eta) = one_hot("A(pt0).");
        let report = probe_extension(&eta, &kb, &ProbeConfig { trials: 1, points: 1, ..Default::default() }).unwrap();
        assert!(report.records[0].points.contains_key("pt1"));
    }
}
