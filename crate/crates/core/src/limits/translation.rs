use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::Triple;
use crate::geometry::lp::LpSystem;
use crate::geometry::{Point, Polytope};
use crate::rational::{frac, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum GraphProperty {
    /// Reflexive over the subset but some `(x, y)` lacks `(y, x)`.
    ReflexiveNotSymmetric { x: String, y: String },
    /// Reflexive over the subset but `(x, y), (y, z)` lacks `(x, z)`.
    ReflexiveNotTransitive { x: String, y: String, z: String },
    /// `e` relates to all of the subset, `f` to `related` but not to `missing`.
    Saturation { e: String, f: String, related: String, missing: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphViolation {
    pub relation: String,
    pub subset: BTreeSet<String>,
    pub property: GraphProperty,
}

/// Necessary conditions for a graph to be represented exactly by a
/// translation model, checked for every relation over `subset`:
/// reflexivity forces symmetry and transitivity, and if one entity relates
/// to all of the subset then any entity relating to some of it relates to
/// all of it. One violation is reported per relation and property.
pub fn translation_graph_properties(graph: &BTreeSet<Triple>, subset: &BTreeSet<String>) -> Vec<GraphViolation> {
    let relations: BTreeSet<&String> = graph.iter().map(|t| &t.1).collect();
    let entities: BTreeSet<&String> = graph.iter().flat_map(|t| [&t.0, &t.2]).collect();
    let has = |x: &String, r: &String, y: &String| graph.contains(&(x.clone(), r.clone(), y.clone()));
    let mut out = Vec::new();
    let mut report = |relation: &String, property| {
        out.push(GraphViolation { relation: relation.clone(), subset: subset.clone(), property })
    };
    for r in relations {
        if !subset.is_empty() && subset.iter().all(|x| has(x, r, x)) {
            let asym = subset
                .iter()
                .flat_map(|x| subset.iter().map(move |y| (x, y)))
                .find(|(x, y)| has(x, r, y) && !has(y, r, x));
            if let Some((x, y)) = asym {
                report(r, GraphProperty::ReflexiveNotSymmetric { x: x.clone(), y: y.clone() });
            }
            let intrans = subset
                .iter()
                .flat_map(|x| subset.iter().flat_map(move |y| subset.iter().map(move |z| (x, y, z))))
                .find(|(x, y, z)| has(x, r, y) && has(y, r, z) && !has(x, r, z));
            if let Some((x, y, z)) = intrans {
                report(r, GraphProperty::ReflexiveNotTransitive { x: x.clone(), y: y.clone(), z: z.clone() });
            }
        }
        let full: Vec<&String> =
            entities.iter().copied().filter(|e| !subset.is_empty() && subset.iter().all(|s| has(e, r, s))).collect();
        if let Some(e) = full.first() {
            'found: for f in &entities {
                let related = subset.iter().find(|s| has(f, r, s));
                let missing = subset.iter().find(|s| !has(f, r, s));
                if let (Some(a), Some(b)) = (related, missing) {
                    report(
                        r,
                        GraphProperty::Saturation {
                            e: (*e).clone(),
                            f: (*f).clone(),
                            related: a.clone(),
                            missing: b.clone(),
                        },
                    );
                    break 'found;
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Premise {
    /// `C_W + C_M ⊆ C_H`: every husband of a wife is a husband.
    WifePlusMarriedInHusband,
    /// `C_W ⊆ C_H + C_M`: every wife is married to a husband.
    WifeInHusbandPlusMarried,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("premise {premise:?} fails at {witness}")]
pub struct PremiseViolated {
    pub premise: Premise,
    pub witness: Point,
}

/// One vertex `q` of `C_W` placed inside `C_H`: `q = p + r` with `p ∈ C_H`,
/// `r ∈ C_M`, and `q` is the midpoint of `p` and `q + r`, both in `C_H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsumptionStep {
    pub q: Point,
    pub p: Point,
    pub r: Point,
    pub q_plus_r: Point,
}

/// Writes `q` as `p + r` with `p`, `r` convex combinations of the vertices
/// of `a` and `b`.
fn minkowski_split(q: &Point, a: &Polytope, b: &Polytope) -> Option<(Point, Point)> {
    let (na, nb) = (a.vertices().len(), b.vertices().len());
    if na == 0 || nb == 0 {
        return None;
    }
    let total = na + nb;
    let mut lp = LpSystem::new(total);
    let mut ones_a = vec![Q::zero(); total];
    ones_a[..na].iter_mut().for_each(|x| *x = Q::one());
    lp.add_eq(ones_a, Q::one());
    let mut ones_b = vec![Q::zero(); total];
    ones_b[na..].iter_mut().for_each(|x| *x = Q::one());
    lp.add_eq(ones_b, Q::one());
    for c in 0..q.dim() {
        let row = a.vertices().iter().chain(b.vertices()).map(|v| v.coords[c].clone()).collect();
        lp.add_eq(row, q.coords[c].clone());
    }
    let w = lp.solve()?;
    let mix =
        |vs: &[Point], ws: &[Q]| vs.iter().zip(ws).fold(Point::zeros(q.dim()), |acc, (v, x)| acc.add(&v.scale(x)));
    Some((mix(a.vertices(), &w[..na]), mix(b.vertices(), &w[na..])))
}

/// Checks both premises and, for every vertex `q` of `C_W`, exhibits why it
/// must lie in `C_H`. Since `C_W` is the hull of those vertices this shows
/// `C_W ⊆ C_H`.
pub fn translation_subsumption_demo(
    c_h: &Polytope,
    c_w: &Polytope,
    c_m: &Polytope,
) -> Result<Vec<SubsumptionStep>, PremiseViolated> {
    // the Minkowski sum is the hull of pairwise vertex sums
    for w in c_w.vertices() {
        for m in c_m.vertices() {
            let x = w.add(m);
            if !c_h.contains(&x).expect("same dimension") {
                return Err(PremiseViolated { premise: Premise::WifePlusMarriedInHusband, witness: x });
            }
        }
    }
    let mut steps = Vec::new();
    for q in c_w.vertices() {
        let (p, r) = minkowski_split(q, c_h, c_m)
            .ok_or_else(|| PremiseViolated { premise: Premise::WifeInHusbandPlusMarried, witness: q.clone() })?;
        let q_plus_r = q.add(&r);
        debug_assert!(c_h.contains(&q_plus_r).unwrap());
        let half = frac(1, 2);
        debug_assert_eq!(&p.add(&q_plus_r).scale(&half), q);
        debug_assert!(c_h.contains(q).unwrap());
        steps.push(SubsumptionStep { q: q.clone(), p, r, q_plus_r });
    }
    Ok(steps)
}
