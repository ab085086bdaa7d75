use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use super::dd::extreme_rays;
use super::linalg::affine_hull;
use super::lp::feasible_nonneg;
use super::{GeometryError, Point};
use crate::rational::{dot, to_integer_row, Q};

/// Largest intrinsic dimension for which facets are enumerated.
pub const HREP_MAX_DIM: usize = 24;
/// Largest vertex count for which facets are enumerated.
pub const HREP_MAX_VERTICES: usize = 64;
const HREP_MAX_RAYS: usize = 20_000;

/// Facet description: `a·x = b` for each equality, `a·x ≤ b` for each
/// inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep {
    pub equalities: Vec<(Vec<Q>, Q)>,
    pub inequalities: Vec<(Vec<Q>, Q)>,
}

impl HRep {
    pub fn contains(&self, x: &[Q]) -> bool {
        self.equalities.iter().all(|(a, b)| dot(a, x) == *b) && self.inequalities.iter().all(|(a, b)| dot(a, x) <= *b)
    }
}

/// Convex hull of finitely many rational points. The vertex list is kept
/// sorted and free of duplicates; it may contain non-extreme points.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    // all vertex coordinates are 0 or 1
    binary: bool,
    hrep: Arc<OnceLock<Option<HRep>>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn new(dim: usize, mut vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(GeometryError::DimensionMismatch { expected: dim, got: v.dim() });
        }
        vertices.sort();
        vertices.dedup();
        let binary = vertices.iter().all(is_binary);
        Ok(Polytope { dim, vertices, binary, hrep: Arc::default() })
    }

    pub fn empty(dim: usize) -> Self {
        Polytope { dim, vertices: Vec::new(), binary: true, hrep: Arc::default() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Exact membership test.
    pub fn contains(&self, x: &Point) -> Result<bool, GeometryError> {
        if x.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        if self.vertices.is_empty() {
            return Ok(false);
        }
        if self.vertices.binary_search(x).is_ok() {
            return Ok(true);
        }
        // a 0/1 point is a vertex of the unit cube, so it lies in the hull
        // of other cube vertices only if it is one of them
        if self.binary && is_binary(x) {
            return Ok(false);
        }
        if let Some(Some(h)) = self.hrep.get() {
            return Ok(h.contains(&x.coords));
        }
        Ok(self.contains_lp(x))
    }

    /// Writes `x` as a convex combination of the vertices, if possible.
    pub fn convex_weights(&self, x: &Point) -> Option<Vec<Q>> {
        if x.dim() != self.dim || self.vertices.is_empty() {
            return None;
        }
        let q = self.vertices.len();
        let mut a = vec![vec![Q::one(); q]];
        let mut b = vec![Q::one()];
        for c in 0..self.dim {
            a.push(self.vertices.iter().map(|v| v.coords[c].clone()).collect());
            b.push(x.coords[c].clone());
        }
        feasible_nonneg(&a, &b)
    }

    fn contains_lp(&self, x: &Point) -> bool {
        let q = self.vertices.len();
        let mut rows: Vec<(Vec<Q>, Q)> = Vec::new();
        for c in 0..self.dim {
            let col: Vec<Q> = self.vertices.iter().map(|v| v.coords[c].clone()).collect();
            let lo = col.iter().min().unwrap();
            let hi = col.iter().max().unwrap();
            let xc = &x.coords[c];
            if xc < lo || xc > hi {
                return false;
            }
            if lo == hi {
                continue;
            }
            match rows.iter().find(|(r, _)| *r == col) {
                Some((_, rhs)) if rhs != xc => return false,
                Some(_) => {}
                None => rows.push((col, xc.clone())),
            }
        }
        let mut a = vec![vec![Q::one(); q]];
        let mut b = vec![Q::one()];
        for (r, rhs) in rows {
            a.push(r);
            b.push(rhs);
        }
        feasible_nonneg(&a, &b).is_some()
    }

    /// Facet description, computed once and shared between clones. `None`
    /// when the polytope is beyond the enumeration caps.
    pub fn hrep(&self) -> Option<&HRep> {
        self.hrep.get_or_init(|| compute_hrep(self.dim, &self.vertices)).as_ref()
    }

    /// Image under the coordinate projection onto `start..start + len`.
    pub fn project_block(&self, start: usize, len: usize) -> Polytope {
        let vs = self.vertices.iter().map(|v| v.block(start, len)).collect();
        Polytope::new(len, vs).expect("projected dims agree")
    }

    /// Dimension of the affine hull, or `None` when empty.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        if self.vertices.is_empty() {
            return None;
        }
        let pts: Vec<Vec<Q>> = self.vertices.iter().map(|v| v.coords.clone()).collect();
        Some(affine_hull(&pts).pivots.len())
    }
}

fn is_binary(p: &Point) -> bool {
    p.coords.iter().all(|c| c.is_zero() || c.is_one())
}

fn compute_hrep(dim: usize, vertices: &[Point]) -> Option<HRep> {
    if vertices.is_empty() {
        // 0 = 1
        return Some(HRep { equalities: vec![(vec![Q::zero(); dim], Q::one())], inequalities: Vec::new() });
    }
    if vertices.len() > HREP_MAX_VERTICES {
        return None;
    }
    let pts: Vec<Vec<Q>> = vertices.iter().map(|v| v.coords.clone()).collect();
    let hull = affine_hull(&pts);
    let d = hull.pivots.len();
    if d > HREP_MAX_DIM {
        return None;
    }
    let mut inequalities = Vec::new();
    if d > 0 {
        // valid inequalities (a, β) with a·q ≤ β for every projected vertex q
        let rows: Vec<_> = pts
            .iter()
            .map(|p| {
                let mut r: Vec<Q> = hull.pivots.iter().map(|&j| -p[j].clone()).collect();
                r.push(Q::one());
                to_integer_row(&r)
            })
            .collect();
        let rays = extreme_rays(&rows, d + 1, HREP_MAX_RAYS).ok()?;
        for ray in rays {
            if ray[..d].iter().all(Zero::is_zero) {
                continue;
            }
            let mut a = vec![Q::zero(); dim];
            for (k, &j) in hull.pivots.iter().enumerate() {
                a[j] = Q::from_integer(ray[k].clone());
            }
            inequalities.push((a, Q::from_integer(ray[d].clone())));
        }
        inequalities.sort();
    }
    Some(HRep { equalities: hull.equalities, inequalities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn pt(xs: &[i64]) -> Point {
        Point::from_ints(xs)
    }

    #[test]
    fn interval_membership() {
        let p = Polytope::new(1, vec![pt(&[0]), pt(&[1])]).unwrap();
        assert!(p.contains(&Point::new(vec![frac(1, 2)])).unwrap());
        assert!(!p.contains(&Point::new(vec![frac(3, 2)])).unwrap());
        assert!(p.contains(&pt(&[1, 1])).is_err());
    }

    #[test]
    fn unit_vectors() {
        let p = Polytope::new(4, vec![Point::unit(4, 0), Point::unit(4, 1)]).unwrap();
        assert!(!p.contains(&Point::unit(4, 2)).unwrap());
        assert!(p.contains(&Point::new(vec![frac(1, 3), frac(2, 3), q(0), q(0)])).unwrap());
    }

    #[test]
    fn diagonal_midpoint() {
        // the midpoint b⊕b of two diagonal points
        let a1 = pt(&[1, 0]);
        let a2 = pt(&[0, 1]);
        let r1 = Polytope::new(4, vec![super::super::concat([&a1, &a1]), super::super::concat([&a2, &a2])]).unwrap();
        let r2 = Polytope::new(4, vec![super::super::concat([&a1, &a2]), super::super::concat([&a2, &a1])]).unwrap();
        let b = Point::new(vec![frac(1, 2), frac(1, 2)]);
        let bb = super::super::concat([&b, &b]);
        assert!(r1.contains(&bb).unwrap());
        assert!(r2.contains(&bb).unwrap());
    }

    #[test]
    fn hrep_of_square() {
        let p = Polytope::new(2, vec![pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1]), pt(&[1, 1])]).unwrap();
        let h = p.hrep().unwrap();
        assert!(h.equalities.is_empty());
        assert_eq!(h.inequalities.len(), 4);
        assert!(h.contains(&[frac(1, 2), q(1)]));
        assert!(!h.contains(&[frac(1, 2), frac(3, 2)]));
    }

    #[test]
    fn hrep_of_lower_dimensional_segment() {
        let p = Polytope::new(3, vec![pt(&[1, 0, 0]), pt(&[0, 1, 0])]).unwrap();
        let h = p.hrep().unwrap().clone();
        assert_eq!(h.equalities.len(), 2);
        assert_eq!(h.inequalities.len(), 2);
        // cache shared with clones, answers agree with the LP
        let c = p.clone();
        for x in [vec![frac(1, 2), frac(1, 2), q(0)], vec![q(2), q(-1), q(0)], vec![q(0), q(0), q(1)]] {
            let x = Point::new(x);
            assert_eq!(h.contains(&x.coords), p.contains_lp(&x));
            assert_eq!(c.contains(&x).unwrap(), p.contains_lp(&x));
        }
    }

    #[test]
    fn empty_and_point() {
        let e = Polytope::empty(2);
        assert!(!e.contains(&pt(&[0, 0])).unwrap());
        assert!(!e.hrep().unwrap().contains(&[q(0), q(0)]));
        let s = Polytope::new(2, vec![pt(&[1, 2])]).unwrap();
        assert!(s.hrep().unwrap().contains(&[q(1), q(2)]));
        assert!(!s.hrep().unwrap().contains(&[q(1), q(3)]));
        assert_eq!(s.intrinsic_dim(), Some(0));
    }

    #[test]
    fn projection() {
        let p = Polytope::new(2, vec![pt(&[0, 5]), pt(&[1, 5])]).unwrap();
        assert_eq!(p.project_block(1, 1).vertices(), &[pt(&[5])]);
    }
}
