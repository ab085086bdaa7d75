//! Exact satisfaction of rules and constraints by convex geometric
//! interpretations, randomized extension probing, and the Helly dimension
//! counterexample.

mod helly;
mod probe;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::dd::{extreme_rays, DdError};
use crate::geometry::linalg::solve_affine;
use crate::geometry::lp::LpSystem;
use crate::geometry::{concat, GeometricInterpretation, GeometryError, Point, Polytope};
use crate::rational::{dot, to_integer_row, Q};
use crate::syntax::{Atom, ExistentialRule, NegativeConstraint, Ontology, Term};

pub use helly::{helly_break, helly_instance, random_helly_interpretation, HellyBreak, HellyError};
pub use probe::{probe_extension, ProbeConfig, ProbeReport, Sampler, TrialRecord};

/// Largest dimension of the solution space of a body's equalities for which
/// vertices are enumerated.
pub const BODY_MAX_DIM: usize = 40;
const BODY_MAX_RAYS: usize = 50_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RuleVerdict {
    Satisfied,
    /// A body point (one point per variable) whose head fails.
    Violated {
        witness: BTreeMap<String, Point>,
    },
    Inconclusive {
        reason: String,
    },
}

impl RuleVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, RuleVerdict::Satisfied)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, RuleVerdict::Violated { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BodyError {
    #[error("dimension {0} exceeds the exact-check cap")]
    DimensionCapExceeded(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The set of concatenated variable points satisfying every body atom, as a
/// polytope over R^(v·m) with blocks in the order of `vars`.
pub fn body_polytope(eta: &GeometricInterpretation, body: &[Atom], vars: &[String]) -> Result<Polytope, BodyError> {
    let m = eta.m();
    let n = vars.len() * m;
    let block = |v: &str| vars.iter().position(|x| x == v).expect("body variable listed");
    let regions: Vec<&Polytope> = match body.iter().map(|a| eta.region(&a.relation).filter(|r| !r.is_empty())).collect()
    {
        Some(rs) => rs,
        None => return Ok(Polytope::empty(n)),
    };
    // one atom over distinct variables: the region itself, blocks permuted
    if let [atom] = body {
        let distinct: Vec<&str> = atom.vars().collect();
        let all_vars = distinct.len() == atom.arity() && atom.arity() == vars.len();
        let unique = distinct.iter().collect::<std::collections::BTreeSet<_>>().len() == distinct.len();
        if all_vars && unique {
            let perm: Vec<usize> = vars.iter().map(|v| distinct.iter().position(|x| x == v).unwrap()).collect();
            let vs = regions[0]
                .vertices()
                .iter()
                .map(|p| concat(perm.iter().map(|&i| p.block(i * m, m)).collect::<Vec<_>>().iter()))
                .collect();
            return Ok(Polytope::new(n, vs)?);
        }
    }
    let mut eqs: Vec<(Vec<Q>, Q)> = Vec::new();
    let mut les: Vec<(Vec<Q>, Q)> = Vec::new();
    for (atom, region) in body.iter().zip(&regions) {
        let h = region.hrep().ok_or(BodyError::DimensionCapExceeded(region.dim()))?;
        let lift = |a: &[Q], b: &Q| -> Result<(Vec<Q>, Q), GeometryError> {
            let mut row = vec![Q::zero(); n];
            let mut rhs = b.clone();
            for (i, t) in atom.args.iter().enumerate() {
                let ai = &a[i * m..(i + 1) * m];
                match t {
                    Term::Variable(v) => {
                        let off = block(v) * m;
                        for (k, c) in ai.iter().enumerate() {
                            row[off + k] += c;
                        }
                    }
                    _ => rhs -= dot(ai, &eta.point(t)?.coords),
                }
            }
            Ok((row, rhs))
        };
        for (a, b) in &h.equalities {
            eqs.push(lift(a, b)?);
        }
        for (a, b) in &h.inequalities {
            les.push(lift(a, b)?);
        }
    }
    let (a_eq, b_eq): (Vec<Vec<Q>>, Vec<Q>) = eqs.into_iter().unzip();
    let Some((x0, basis)) = solve_affine(&a_eq, &b_eq, n) else {
        return Ok(Polytope::empty(n));
    };
    let d = basis.len();
    if d == 0 {
        let inside = les.iter().all(|(a, b)| dot(a, &x0) <= *b);
        let vs = if inside { vec![Point::new(x0)] } else { Vec::new() };
        return Ok(Polytope::new(n, vs)?);
    }
    if d > BODY_MAX_DIM {
        return Err(BodyError::DimensionCapExceeded(d));
    }
    // homogenized cone over (t, s): s ≥ 0 and (b - a·x0) s - (a·N) t ≥ 0
    let mut rows = Vec::with_capacity(les.len() + 1);
    let mut s_row = vec![Q::zero(); d + 1];
    s_row[d] = Q::one();
    rows.push(to_integer_row(&s_row));
    for (a, b) in &les {
        let mut r: Vec<Q> = basis.iter().map(|col| -dot(a, col)).collect();
        r.push(b - dot(a, &x0));
        rows.push(to_integer_row(&r));
    }
    let rays = match extreme_rays(&rows, d + 1, BODY_MAX_RAYS) {
        Ok(r) => r,
        Err(DdError::TooManyRays(_)) => return Err(BodyError::DimensionCapExceeded(d)),
        Err(e @ DdError::NotPointed { .. }) => unreachable!("bounded regions give a pointed cone: {e}"),
    };
    let mut vs = Vec::new();
    for ray in rays {
        let s = Q::from_integer(ray[d].clone());
        if !s.is_positive() {
            continue;
        }
        let mut x = x0.clone();
        for (tj, col) in ray[..d].iter().zip(&basis) {
            let c = Q::from_integer(tj.clone()) / &s;
            if c.is_zero() {
                continue;
            }
            for (xi, ni) in x.iter_mut().zip(col) {
                *xi += &c * ni;
            }
        }
        vs.push(Point::new(x));
    }
    Ok(Polytope::new(n, vs)?)
}

fn split_witness(x: &Point, vars: &[String], m: usize) -> BTreeMap<String, Point> {
    vars.iter().enumerate().map(|(i, v)| (v.clone(), x.block(i * m, m))).collect()
}

fn term_point(eta: &GeometricInterpretation, t: &Term, w: &BTreeMap<String, Point>) -> Result<Point, GeometryError> {
    match t {
        Term::Variable(v) => Ok(w[v].clone()),
        _ => eta.point(t).cloned(),
    }
}

/// Whether the head holds at a fixed assignment of the body variables.
fn head_holds(
    eta: &GeometricInterpretation,
    rule: &ExistentialRule,
    w: &BTreeMap<String, Point>,
) -> Result<bool, GeometryError> {
    let m = eta.m();
    if rule.is_datalog() {
        for h in &rule.head {
            let Some(region) = eta.region(&h.relation) else { return Ok(false) };
            let x = concat(&h.args.iter().map(|t| term_point(eta, t, w)).collect::<Result<Vec<_>, _>>()?);
            if !region.contains(&x)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    // λ block per head atom, then m free coordinates per existential variable
    let evars: Vec<&String> = rule.evars.iter().collect();
    let mut offsets = Vec::new();
    let mut n = 0;
    for h in &rule.head {
        let Some(region) = eta.region(&h.relation).filter(|r| !r.is_empty()) else { return Ok(false) };
        offsets.push(n);
        n += region.vertices().len();
    }
    let z0 = n;
    n += evars.len() * m;
    let mut lp = LpSystem::new(n);
    for j in z0..n {
        lp.set_free(j);
    }
    for (h, &off) in rule.head.iter().zip(&offsets) {
        let vs = eta.region(&h.relation).unwrap().vertices();
        let mut sum = vec![Q::zero(); n];
        for i in 0..vs.len() {
            sum[off + i] = Q::one();
        }
        lp.add_eq(sum, Q::one());
        for (pos, t) in h.args.iter().enumerate() {
            let target = match t {
                Term::Variable(v) if rule.evars.contains(v) => None,
                _ => Some(term_point(eta, t, w)?),
            };
            for c in 0..m {
                let mut row = vec![Q::zero(); n];
                for (i, v) in vs.iter().enumerate() {
                    row[off + i] = v.coords[pos * m + c].clone();
                }
                let rhs = match &target {
                    Some(p) => p.coords[c].clone(),
                    None => {
                        let zi = evars.iter().position(|z| Some(z.as_str()) == t.as_variable()).unwrap();
                        row[z0 + zi * m + c] = -Q::one();
                        Q::zero()
                    }
                };
                lp.add_eq(row, rhs);
            }
        }
    }
    Ok(lp.solve().is_some())
}

/// Decides whether every assignment of points satisfying the body also
/// satisfies the head. Checking the vertices of the body polytope suffices
/// because the set of body points whose head holds is convex.
pub fn check_rule_geometric(eta: &GeometricInterpretation, rule: &ExistentialRule) -> RuleVerdict {
    let vars = rule.body_vars();
    let body = match body_polytope(eta, &rule.body, &vars) {
        Ok(p) => p,
        Err(e) => return RuleVerdict::Inconclusive { reason: e.to_string() },
    };
    for v in body.vertices() {
        let w = split_witness(v, &vars, eta.m());
        match head_holds(eta, rule, &w) {
            Ok(true) => {}
            Ok(false) => return RuleVerdict::Violated { witness: w },
            Err(e) => return RuleVerdict::Inconclusive { reason: e.to_string() },
        }
    }
    RuleVerdict::Satisfied
}

/// Satisfied iff no assignment of points satisfies the whole body.
pub fn check_constraint(eta: &GeometricInterpretation, constraint: &NegativeConstraint) -> RuleVerdict {
    let vars = constraint.body_vars();
    match body_polytope(eta, &constraint.body, &vars) {
        Ok(p) => match p.vertices().first() {
            None => RuleVerdict::Satisfied,
            Some(v) => RuleVerdict::Violated { witness: split_witness(v, &vars, eta.m()) },
        },
        Err(e) => RuleVerdict::Inconclusive { reason: e.to_string() },
    }
}

/// Verdicts for every rule and constraint, in ontology order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyVerdicts {
    pub rules: Vec<RuleVerdict>,
    pub constraints: Vec<RuleVerdict>,
}

impl OntologyVerdicts {
    pub fn all_satisfied(&self) -> bool {
        self.rules.iter().chain(&self.constraints).all(RuleVerdict::is_satisfied)
    }

    pub fn any_violated(&self) -> bool {
        self.rules.iter().chain(&self.constraints).any(RuleVerdict::is_violated)
    }
}

pub fn check_ontology(eta: &GeometricInterpretation, ontology: &Ontology) -> OntologyVerdicts {
    OntologyVerdicts {
        rules: ontology.rules.iter().map(|r| check_rule_geometric(eta, r)).collect(),
        constraints: ontology.constraints.iter().map(|c| check_constraint(eta, c)).collect(),
    }
}

/// Re-checks a witness directly: all body atoms hold at the given points and,
/// for rules, the head does not.
pub fn witness_is_valid(
    eta: &GeometricInterpretation,
    body: &[Atom],
    rule: Option<&ExistentialRule>,
    witness: &BTreeMap<String, Point>,
) -> Result<bool, GeometryError> {
    for a in body {
        let Some(region) = eta.region(&a.relation) else { return Ok(false) };
        let x = concat(&a.args.iter().map(|t| term_point(eta, t, witness)).collect::<Result<Vec<_>, _>>()?);
        if !region.contains(&x)? {
            return Ok(false);
        }
    }
    match rule {
        Some(r) => Ok(!head_holds(eta, r, witness)?),
        None => Ok(true),
    }
}
