//! The one-hot convex model of a finite interpretation, its compact form for
//! datalog, and the lookup-table model with non-linear tuple maps.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{concat, GeometricInterpretation, GeometryError, Point, Polytope};
use crate::chase::Interpretation;
use crate::rational::{q, Q};
use crate::syntax::{Atom, Signature, Term};

/// Objects of `m` in the canonical order: constants lexicographically, then
/// nulls by index.
pub fn object_order(m: &Interpretation) -> Vec<Term> {
    m.objects().into_iter().collect()
}

/// One dimension per object; object `i` sits at the `i`-th unit vector and
/// each relation is the hull of the concatenations of its facts. Relations
/// of `signature` without facts get empty regions.
pub fn build_prop3_model(m: &Interpretation, signature: &Signature) -> GeometricInterpretation {
    let objects = object_order(m);
    let dim = objects.len();
    let mut eta = GeometricInterpretation::new(dim);
    let index: BTreeMap<&Term, usize> = objects.iter().enumerate().map(|(i, o)| (o, i)).collect();
    for (i, o) in objects.iter().enumerate() {
        eta.add_entity(o.clone(), Point::unit(dim, i)).expect("fresh objects");
    }
    let mut sig = signature.clone();
    for a in m.iter() {
        sig.entry(a.relation.clone()).or_insert(a.arity());
    }
    for (rel, &k) in &sig {
        let vertices = m
            .iter()
            .filter(|a| &a.relation == rel)
            .map(|a| {
                let pts: Vec<Point> = a.args.iter().map(|t| Point::unit(dim, index[t])).collect();
                concat(&pts)
            })
            .collect();
        let region = Polytope::new(k * dim, vertices).expect("one-hot dims");
        eta.set_region(rel, k, region).expect("one-hot dims");
    }
    eta
}

/// Checks that every entity sits at a distinct unit vector covering all `m`
/// coordinates.
fn check_one_hot(eta: &GeometricInterpretation) -> Result<(), GeometryError> {
    let m = eta.m();
    if eta.entities().len() != m {
        return Err(GeometryError::NotOneHotBase(format!("{} entities in dimension {m}", eta.entities().len())));
    }
    let mut seen = vec![false; m];
    for (o, p) in eta.entities() {
        let ones: Vec<usize> = (0..m).filter(|&i| p.coords[i].is_one()).collect();
        let unit = ones.len() == 1 && p.coords.iter().filter(|c| !c.is_zero()).count() == 1;
        if !unit || seen[ones[0]] {
            return Err(GeometryError::NotOneHotBase(format!("{o} is not at a distinct unit vector")));
        }
        seen[ones[0]] = true;
    }
    Ok(())
}

/// Drops the last coordinate of every block. All one-hot points lie on the
/// hyperplane where coordinates sum to 1, and dropping one coordinate is an
/// affine bijection from that hyperplane onto R^(m-1), so φ is unchanged.
pub fn compact_datalog_model(eta: &GeometricInterpretation) -> Result<GeometricInterpretation, GeometryError> {
    check_one_hot(eta)?;
    let m = eta.m();
    if m == 0 {
        return Ok(eta.clone());
    }
    let c = m - 1;
    let chart = |p: &Point, k: usize| -> Point {
        let blocks: Vec<Point> = (0..k).map(|i| p.block(i * m, c)).collect();
        concat(&blocks)
    };
    let mut out = GeometricInterpretation::new(c);
    for (o, p) in eta.entities() {
        out.add_entity(o.clone(), chart(p, 1))?;
    }
    for (rel, region) in eta.regions() {
        let k = eta.arities()[rel];
        let vs = region.vertices().iter().map(|v| chart(v, k)).collect();
        out.set_region(rel, k, Polytope::new(k * c, vs)?)?;
    }
    Ok(out)
}

/// Points on a line plus, per relation, the finite set of argument vectors
/// mapped to 1. Every region is `{1}`, so an atom holds exactly when its
/// concatenated point is listed in the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedGeometricInterpretation {
    pub m: usize,
    pub entities: BTreeMap<Term, Point>,
    pub arities: Signature,
    pub tables: BTreeMap<String, BTreeSet<Point>>,
}

impl ExtendedGeometricInterpretation {
    /// Value of the tuple map: 1 for listed inputs, 0 for everything else.
    pub fn transform(&self, relation: &str, x: &Point) -> Q {
        match self.tables.get(relation) {
            Some(t) if t.contains(x) => Q::one(),
            _ => Q::zero(),
        }
    }

    pub fn satisfies_atom(&self, atom: &Atom) -> Result<bool, GeometryError> {
        let pts = atom
            .args
            .iter()
            .map(|t| self.entities.get(t).ok_or_else(|| GeometryError::UnknownObject(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.transform(&atom.relation, &concat(pts)).is_one())
    }

    pub fn phi(&self) -> BTreeSet<Atom> {
        let objects: Vec<&Term> = self.entities.keys().collect();
        let mut out = BTreeSet::new();
        for (rel, &k) in &self.arities {
            let total = objects.len().pow(k as u32);
            for code in 0..total {
                let mut rest = code;
                let mut args = Vec::with_capacity(k);
                for _ in 0..k {
                    args.push(objects[rest % objects.len()].clone());
                    rest /= objects.len();
                }
                let atom = Atom::new(rel.clone(), args);
                if self.satisfies_atom(&atom).unwrap() {
                    out.insert(atom);
                }
            }
        }
        out
    }

    pub fn extend_with_points(&self, assignments: &BTreeMap<Term, Point>) -> Result<Self, GeometryError> {
        let mut out = self.clone();
        for (o, p) in assignments {
            if p.dim() != self.m {
                return Err(GeometryError::DimensionMismatch { expected: self.m, got: p.dim() });
            }
            if out.entities.insert(o.clone(), p.clone()).is_some() {
                return Err(GeometryError::NameCollision(o.to_string()));
            }
        }
        Ok(out)
    }
}

/// Object `i` (canonical order) at the integer `i + 1` on the line; each
/// relation's table lists the concatenations of its facts.
pub fn build_extended_trivial(m: &Interpretation) -> ExtendedGeometricInterpretation {
    let objects = object_order(m);
    let entities: BTreeMap<Term, Point> =
        objects.iter().enumerate().map(|(i, o)| (o.clone(), Point::new(vec![q(i as i64 + 1)]))).collect();
    let mut arities = Signature::new();
    let mut tables: BTreeMap<String, BTreeSet<Point>> = BTreeMap::new();
    for a in m.iter() {
        arities.insert(a.relation.clone(), a.arity());
        let x = concat(a.args.iter().map(|t| &entities[t]));
        tables.entry(a.relation.clone()).or_default().insert(x);
    }
    ExtendedGeometricInterpretation { m: 1, entities, arities, tables }
}
