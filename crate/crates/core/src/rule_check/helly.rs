use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::Rng;

use crate::chase::{chase_from, ChaseResult, Interpretation, DEFAULT_MAX_STEPS};
use crate::geometry::lp::LpSystem;
use crate::geometry::{GeometricInterpretation, Point, Polytope};
use crate::rational::Q;
use crate::syntax::{Atom, KnowledgeBase, NegativeConstraint, Ontology, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HellyError {
    #[error("n must be at least 2, got {0}")]
    MinimumN(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("the regions have no common point")]
    NoPointFound,
}

/// Relations `A1..An`, constants `a1..an`, facts `Ai(aj)` for `i != j`, and
/// the constraint that no object is in every `Ai`.
pub fn helly_instance(n: usize) -> Result<KnowledgeBase, HellyError> {
    if n < 2 {
        return Err(HellyError::MinimumN(n));
    }
    let mut database = BTreeSet::new();
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            database.insert(Atom::fact(&format!("A{i}"), &[&format!("a{j}")]));
        }
    }
    let body = (1..=n).map(|i| Atom::new(format!("A{i}"), vec![Term::var("X")])).collect();
    let ontology =
        Ontology { rules: Vec::new(), constraints: vec![NegativeConstraint::new(body).expect("nonempty body")] };
    Ok(KnowledgeBase::new(ontology, database))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HellyBreak {
    /// A point in every region.
    pub point: Point,
    /// Name under which the point was added.
    pub object: Term,
    /// Chase outcome on the database plus everything that holds after adding
    /// the point; unsatisfiable whenever the point exists.
    pub certificate: ChaseResult,
}

/// Looks for a point in the intersection of all `Ai` regions. When every
/// `n-1` of them meet (which holds if the database is satisfied) and the
/// dimension is at most `n-2`, Helly's theorem guarantees one.
pub fn helly_break(eta: &GeometricInterpretation, n: usize) -> Result<HellyBreak, HellyError> {
    let kb = helly_instance(n)?;
    let m = eta.m();
    let mut regions: Vec<&Polytope> = Vec::with_capacity(n);
    for i in 1..=n {
        match eta.region(&format!("A{i}")) {
            Some(r) if !r.is_empty() && r.dim() == m => regions.push(r),
            _ => return Err(HellyError::PreconditionViolated(format!("A{i} has no nonempty unary region"))),
        }
    }
    for fact in &kb.database {
        let holds = eta.satisfies_atom(fact).map_err(|e| HellyError::PreconditionViolated(e.to_string()))?;
        if !holds {
            return Err(HellyError::PreconditionViolated(format!("{fact} does not hold")));
        }
    }
    // λ blocks per region, then p free
    let sizes: Vec<usize> = regions.iter().map(|r| r.vertices().len()).collect();
    let p0: usize = sizes.iter().sum();
    let total = p0 + m;
    let mut lp = LpSystem::new(total);
    for j in p0..total {
        lp.set_free(j);
    }
    let mut off = 0;
    for (r, &k) in regions.iter().zip(&sizes) {
        let mut sum = vec![Q::zero(); total];
        sum[off..off + k].iter_mut().for_each(|x| *x = Q::one());
        lp.add_eq(sum, Q::one());
        for c in 0..m {
            let mut row = vec![Q::zero(); total];
            for (i, v) in r.vertices().iter().enumerate() {
                row[off + i] = v.coords[c].clone();
            }
            row[p0 + c] = -Q::one();
            lp.add_eq(row, Q::zero());
        }
        off += k;
    }
    let sol = lp.solve().ok_or(HellyError::NoPointFound)?;
    let point = Point::new(sol[p0..].to_vec());

    let mut name = "d".to_string();
    while eta.entities().contains_key(&Term::constant(name.clone())) {
        name.push('_');
    }
    let object = Term::constant(name);
    let ext = eta.extend_with_points(&[(object.clone(), point.clone())].into()).expect("fresh name");
    let mut facts = ext.phi_all();
    facts.extend(kb.database.iter().cloned());
    let certificate =
        chase_from(&kb.ontology, Interpretation::new(facts), DEFAULT_MAX_STEPS).expect("constraints only");
    Ok(HellyBreak { point, object, certificate })
}

/// Random integer points `a1..an` in `[-range, range]^m`, with `Ai` the hull of
/// every point but `ai`. This satisfies the database of `helly_instance(n)`.
pub fn random_helly_interpretation(n: usize, m: usize, range: i64, rng: &mut impl Rng) -> GeometricInterpretation {
    let pts: Vec<Point> =
        (0..n).map(|_| Point::from_ints(&(0..m).map(|_| rng.gen_range(-range..=range)).collect::<Vec<_>>())).collect();
    let mut eta = GeometricInterpretation::new(m);
    for (j, p) in pts.iter().enumerate() {
        eta.add_entity(Term::constant(format!("a{}", j + 1)), p.clone()).expect("distinct names");
    }
    for i in 0..n {
        let vs = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
        eta.set_region(&format!("A{}", i + 1), 1, Polytope::new(m, vs).expect("dimension m")).expect("dimension m");
    }
    eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::chase;
    use crate::geometry::{build_prop3_model, compact_datalog_model};
    use crate::rule_check::check_ontology;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances() {
        let kb = helly_instance(3).unwrap();
        let facts: Vec<String> = kb.database.iter().map(Atom::to_string).collect();
        assert_eq!(facts, ["A1(a2)", "A1(a3)", "A2(a1)", "A2(a3)", "A3(a1)", "A3(a2)"]);
        assert_eq!(kb.ontology.constraints.len(), 1);
        assert_eq!(kb.ontology.constraints[0].body.len(), 3);
        let two = helly_instance(2).unwrap();
        assert_eq!(two.database.len(), 2);
        assert_eq!(helly_instance(1), Err(HellyError::MinimumN(1)));
        // the database is its own model
        assert_eq!(chase(&kb, DEFAULT_MAX_STEPS).unwrap().model().unwrap().atoms, kb.database);
    }

    #[test]
    fn line_models_break() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let eta = random_helly_interpretation(3, 1, 10, &mut rng);
            let b = helly_break(&eta, 3).unwrap();
            for i in 1..=3 {
                assert!(eta.region(&format!("A{i}")).unwrap().contains(&b.point).unwrap());
            }
            assert_eq!(b.certificate.is_satisfiable(), Some(false));
        }
    }

    #[test]
    fn compacted_one_hot_model_has_no_common_point() {
        let kb = helly_instance(3).unwrap();
        let m = chase(&kb, DEFAULT_MAX_STEPS).unwrap().model().unwrap().clone();
        let eta = compact_datalog_model(&build_prop3_model(&m, &kb.signature())).unwrap();
        assert_eq!(eta.m(), 2);
        assert!(check_ontology(&eta, &kb.ontology).all_satisfied());
        assert_eq!(helly_break(&eta, 3), Err(HellyError::NoPointFound));
    }

    #[test]
    fn identical_regions_and_bad_input() {
        let mut eta = GeometricInterpretation::new(1);
        let seg = Polytope::new(1, vec![Point::from_ints(&[0]), Point::from_ints(&[4])]).unwrap();
        for i in 1..=3 {
            eta.add_entity(Term::constant(format!("a{i}")), Point::from_ints(&[i])).unwrap();
            eta.set_region(&format!("A{i}"), 1, seg.clone()).unwrap();
        }
        let b = helly_break(&eta, 3).unwrap();
        assert!(seg.contains(&b.point).unwrap());
        let mut missing = GeometricInterpretation::new(1);
        missing.set_region("A1", 1, seg.clone()).unwrap();
        assert!(matches!(helly_break(&missing, 3), Err(HellyError::PreconditionViolated(_))));
    }
}
