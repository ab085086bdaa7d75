use std::collections::{BTreeMap, BTreeSet};

use super::{concat, GeometryError, Point, Polytope};
use crate::syntax::{Atom, Signature, Term};

/// Points for objects and convex regions for relations, all in a common
/// base dimension `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricInterpretation {
    m: usize,
    entities: BTreeMap<Term, Point>,
    arities: Signature,
    regions: BTreeMap<String, Polytope>,
}

impl GeometricInterpretation {
    pub fn new(m: usize) -> Self {
        GeometricInterpretation { m, entities: BTreeMap::new(), arities: Signature::new(), regions: BTreeMap::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entities(&self) -> &BTreeMap<Term, Point> {
        &self.entities
    }

    pub fn regions(&self) -> &BTreeMap<String, Polytope> {
        &self.regions
    }

    pub fn arities(&self) -> &Signature {
        &self.arities
    }

    pub fn objects(&self) -> BTreeSet<Term> {
        self.entities.keys().cloned().collect()
    }

    pub fn add_entity(&mut self, object: Term, point: Point) -> Result<(), GeometryError> {
        if point.dim() != self.m {
            return Err(GeometryError::DimensionMismatch { expected: self.m, got: point.dim() });
        }
        if self.entities.contains_key(&object) {
            return Err(GeometryError::NameCollision(object.to_string()));
        }
        self.entities.insert(object, point);
        Ok(())
    }

    /// Sets the region of a relation, replacing any previous one.
    pub fn set_region(&mut self, relation: &str, arity: usize, region: Polytope) -> Result<(), GeometryError> {
        if region.dim() != arity * self.m {
            return Err(GeometryError::DimensionMismatch { expected: arity * self.m, got: region.dim() });
        }
        self.arities.insert(relation.to_string(), arity);
        self.regions.insert(relation.to_string(), region);
        Ok(())
    }

    pub fn point(&self, object: &Term) -> Result<&Point, GeometryError> {
        self.entities.get(object).ok_or_else(|| GeometryError::UnknownObject(object.to_string()))
    }

    pub fn region(&self, relation: &str) -> Option<&Polytope> {
        self.regions.get(relation)
    }

    /// Concatenated argument points of a ground atom.
    pub fn atom_point(&self, atom: &Atom) -> Result<Point, GeometryError> {
        let pts = atom.args.iter().map(|t| self.point(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(concat(pts))
    }

    /// Relations without a region are treated as empty.
    pub fn satisfies_atom(&self, atom: &Atom) -> Result<bool, GeometryError> {
        let x = self.atom_point(atom)?;
        match self.regions.get(&atom.relation) {
            Some(r) if self.arities[&atom.relation] == atom.arity() => r.contains(&x),
            Some(_) => Ok(false),
            None => Ok(false),
        }
    }

    /// All ground atoms over `objects` that hold.
    pub fn phi(&self, objects: &BTreeSet<Term>) -> Result<BTreeSet<Atom>, GeometryError> {
        self.phi_touching(objects, None)
    }

    pub fn phi_all(&self) -> BTreeSet<Atom> {
        self.phi(&self.objects()).expect("own objects are known")
    }

    /// Atoms over `objects` that mention at least one object of `fresh`.
    /// Together with the atoms over the remaining objects this is φ over
    /// all of `objects`.
    pub fn phi_touching(
        &self,
        objects: &BTreeSet<Term>,
        fresh: Option<&BTreeSet<Term>>,
    ) -> Result<BTreeSet<Atom>, GeometryError> {
        let pts: Vec<(&Term, &Point)> =
            objects.iter().map(|o| self.point(o).map(|p| (o, p))).collect::<Result<_, _>>()?;
        let mut out = BTreeSet::new();
        for (rel, region) in &self.regions {
            if region.is_empty() {
                continue;
            }
            let k = self.arities[rel];
            let mut prefixes: Vec<Polytope> = (1..k).map(|j| region.project_block(0, j * self.m)).collect();
            prefixes.push(region.clone());
            // per-position filter through the block projections
            let cands: Vec<Vec<(&Term, &Point)>> = (0..k)
                .map(|i| {
                    let proj = region.project_block(i * self.m, self.m);
                    pts.iter().filter(|(_, p)| proj.contains(p).unwrap()).copied().collect()
                })
                .collect();
            let mut tuple: Vec<(&Term, &Point)> = Vec::with_capacity(k);
            extend_tuple(rel, &cands, &prefixes, fresh, &mut tuple, &mut out);
        }
        Ok(out)
    }

    /// New interpretation where each fresh name is mapped to its point.
    pub fn extend_with_points(&self, assignments: &BTreeMap<Term, Point>) -> Result<Self, GeometryError> {
        let mut out = self.clone();
        for (o, p) in assignments {
            out.add_entity(o.clone(), p.clone())?;
        }
        Ok(out)
    }
}

fn extend_tuple<'a>(
    rel: &str,
    cands: &[Vec<(&'a Term, &'a Point)>],
    prefixes: &[Polytope],
    fresh: Option<&BTreeSet<Term>>,
    tuple: &mut Vec<(&'a Term, &'a Point)>,
    out: &mut BTreeSet<Atom>,
) {
    let j = tuple.len();
    if j == cands.len() {
        if let Some(f) = fresh {
            if !tuple.iter().any(|(o, _)| f.contains(*o)) {
                return;
            }
        }
        out.insert(Atom::new(rel, tuple.iter().map(|(o, _)| (*o).clone()).collect()));
        return;
    }
    for &c in &cands[j] {
        tuple.push(c);
        let x = concat(tuple.iter().map(|(_, p)| *p));
        // single positions were already filtered
        if j == 0 || prefixes[j].contains(&x).unwrap() {
            extend_tuple(rel, cands, prefixes, fresh, tuple, out);
        }
        tuple.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn nonchained() -> GeometricInterpretation {
        let mut g = GeometricInterpretation::new(2);
        let a1 = Point::unit(2, 0);
        let a2 = Point::unit(2, 1);
        g.add_entity(Term::constant("a1"), a1.clone()).unwrap();
        g.add_entity(Term::constant("a2"), a2.clone()).unwrap();
        g.set_region("R1", 2, Polytope::new(4, vec![concat([&a1, &a1]), concat([&a2, &a2])]).unwrap()).unwrap();
        g.set_region("R2", 2, Polytope::new(4, vec![concat([&a1, &a2]), concat([&a2, &a1])]).unwrap()).unwrap();
        g
    }

    #[test]
    fn phi_of_nonchained() {
        let g = nonchained();
        let phi = g.phi_all();
        assert_eq!(phi.len(), 4);
        assert!(phi.contains(&Atom::fact("R2", &["a2", "a1"])));
        assert!(g.phi(&BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn midpoint_extension() {
        let g = nonchained();
        let b = Term::constant("b");
        let mid = Point::new(vec![frac(1, 2), frac(1, 2)]);
        let ext = g.extend_with_points(&[(b.clone(), mid)].into()).unwrap();
        let phi = ext.phi_all();
        assert!(phi.contains(&Atom::fact("R1", &["b", "b"])));
        assert!(phi.contains(&Atom::fact("R2", &["b", "b"])));
        // original objects are unaffected
        let orig = ext.phi(&g.objects()).unwrap();
        assert_eq!(orig, g.phi_all());
        let touching = ext.phi_touching(&ext.objects(), Some(&[b].into())).unwrap();
        assert_eq!(touching.len() + orig.len(), phi.len());
    }

    #[test]
    fn errors() {
        let mut g = nonchained();
        assert_eq!(
            g.add_entity(Term::constant("a1"), Point::unit(2, 0)),
            Err(GeometryError::NameCollision("a1".into()))
        );
        assert!(matches!(
            g.add_entity(Term::constant("c"), Point::unit(3, 0)),
            Err(GeometryError::DimensionMismatch { .. })
        ));
        assert!(matches!(g.satisfies_atom(&Atom::fact("R1", &["zz", "a1"])), Err(GeometryError::UnknownObject(_))));
        assert!(!g.satisfies_atom(&Atom::fact("Nope", &["a1"])).unwrap());
    }
}
