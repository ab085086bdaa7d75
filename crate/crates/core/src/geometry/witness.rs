//! Witnesses for existential demands raised by points added to a one-hot
//! model. A body tuple over new points is written as a convex combination
//! of body matches in the base model; each existential variable then gets
//! the same combination of the matching head witnesses.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::lp::feasible_nonneg;
use super::{combination, concat, GeometricInterpretation, GeometryError, Point};
use crate::chase::{all_homomorphisms, for_each_homomorphism, show_sub, AtomIndex, Substitution};
use crate::rational::Q;
use crate::syntax::{Atom, ExistentialRule, KnowledgeBase, Term};

pub const DEFAULT_MAX_ROUNDS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WitnessError {
    #[error(transparent)]
    NotOneHotBase(#[from] GeometryError),
    #[error("existential demands remain after {0} rounds")]
    RoundsExceeded(usize),
    #[error("body point of rule {rule} under {grounding} is not a convex combination of base matches")]
    NoConvexDecomposition { rule: usize, grounding: String },
}

/// Objects at unit vectors, and the atoms they satisfy.
fn one_hot_base(eta: &GeometricInterpretation) -> Result<(BTreeSet<Term>, BTreeSet<Atom>), GeometryError> {
    let m = eta.m();
    let mut base = BTreeSet::new();
    let mut covered = vec![false; m];
    for (o, p) in eta.entities() {
        let nz: Vec<usize> = (0..m).filter(|&i| !p.coords[i].is_zero()).collect();
        if nz.len() == 1 && p.coords[nz[0]].is_one() {
            base.insert(o.clone());
            covered[nz[0]] = true;
        }
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        return Err(GeometryError::NotOneHotBase(format!("no object at unit vector {i}")));
    }
    for (rel, region) in eta.regions() {
        let k = eta.arities()[rel];
        for v in region.vertices() {
            let one_hot = (0..k).all(|b| {
                let blk = v.block(b * m, m);
                blk.coords.iter().filter(|c| c.is_one()).count() == 1
                    && blk.coords.iter().all(|c| c.is_zero() || c.is_one())
            });
            if !one_hot {
                return Err(GeometryError::NotOneHotBase(format!("region of {rel} has vertex {v}")));
            }
        }
    }
    let atoms = eta.phi(&base)?;
    Ok((base, atoms))
}

/// A body match in the base model together with a head witness.
struct BaseMatch {
    body_point: Point,
    head: Substitution,
}

/// Extends `eta` with null witnesses until every existential rule instance
/// over its objects is witnessed. `eta` must be a one-hot model with
/// additional points.
pub fn synthesize_null_witnesses(
    eta: &GeometricInterpretation,
    kb: &KnowledgeBase,
    max_rounds: usize,
) -> Result<GeometricInterpretation, WitnessError> {
    let (base, m_atoms) = one_hot_base(eta)?;
    let rules: Vec<(usize, &ExistentialRule)> =
        kb.ontology.rules.iter().enumerate().filter(|(_, r)| !r.is_datalog()).collect();
    let mut out = eta.clone();
    if rules.is_empty() || out.objects() == base {
        return Ok(out);
    }
    let m_index = AtomIndex::new(&m_atoms);
    let matches: Vec<Vec<BaseMatch>> = rules
        .iter()
        .map(|(_, r)| {
            let vars = r.body_vars();
            let mut homs = all_homomorphisms(&r.body, &m_index);
            homs.sort_by_key(|h| vars.iter().map(|v| h[v].clone()).collect::<Vec<_>>());
            homs.into_iter()
                .filter_map(|h| {
                    let mut head = None;
                    for_each_homomorphism(&r.head, &m_index, &h, &mut |e| {
                        head = Some(e.clone());
                        false
                    });
                    let body_point = concat(vars.iter().map(|v| &eta.entities()[&h[v]]));
                    head.map(|head| BaseMatch { body_point, head })
                })
                .collect()
        })
        .collect();
    let mut next_null =
        out.objects().iter().filter_map(|t| if let Term::Null(k) = t { Some(*k) } else { None }).max().unwrap_or(0) + 1;
    let mut phi = out.phi_all();
    for _ in 0..max_rounds {
        let index = AtomIndex::new(&phi);
        let mut demands: Vec<(usize, Substitution)> = Vec::new();
        for (ri, (_, r)) in rules.iter().enumerate() {
            let vars = r.body_vars();
            let mut homs = all_homomorphisms(&r.body, &index);
            homs.sort_by_key(|h| vars.iter().map(|v| h[v].clone()).collect::<Vec<_>>());
            for h in homs {
                if !crate::chase::has_extension(&r.head, &index, &h) {
                    demands.push((ri, h));
                }
            }
        }
        if demands.is_empty() {
            return Ok(out);
        }
        let mut added = BTreeSet::new();
        for (ri, h) in demands {
            let (rule_no, r) = rules[ri];
            let vars = r.body_vars();
            let x = concat(vars.iter().map(|v| &out.entities()[&h[v]]));
            let cands = &matches[ri];
            let weights = decompose(&x, cands)
                .ok_or_else(|| WitnessError::NoConvexDecomposition { rule: rule_no, grounding: show_sub(&h) })?;
            let support: Vec<usize> = (0..cands.len()).filter(|&i| !weights[i].is_zero()).collect();
            for z in &r.evars {
                let pts: Vec<&Point> = support.iter().map(|&i| &out.entities()[&cands[i].head[z]]).collect();
                let w: Vec<Q> = support.iter().map(|&i| weights[i].clone()).collect();
                let p = combination(&w, &pts);
                // a point created earlier in this round may already serve
                if out.entities().values().any(|q| *q == p) {
                    continue;
                }
                let o = Term::Null(next_null);
                next_null += 1;
                out.add_entity(o.clone(), p)?;
                added.insert(o);
            }
        }
        if !added.is_empty() {
            phi.extend(out.phi_touching(&out.objects(), Some(&added))?);
        }
    }
    Err(WitnessError::RoundsExceeded(max_rounds))
}

fn decompose(x: &Point, cands: &[BaseMatch]) -> Option<Vec<Q>> {
    if cands.is_empty() {
        return None;
    }
    let mut a = vec![vec![Q::one(); cands.len()]];
    let mut b = vec![Q::one()];
    for c in 0..x.dim() {
        a.push(cands.iter().map(|m| m.body_point.coords[c].clone()).collect());
        b.push(x.coords[c].clone());
    }
    feasible_nonneg(&a, &b)
}
