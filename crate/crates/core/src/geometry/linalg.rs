//! Exact dense linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::rational::Q;

/// Brings `rows` to reduced row echelon form in place, drops zero rows and
/// returns the pivot column of each remaining row.
pub fn rref(rows: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solution set of `A x = b` as `x0 + span(null_basis)`, or `None` when the
/// system is inconsistent. `n` is the number of unknowns.
pub fn solve_affine(a: &[Vec<Q>], b: &[Q], n: usize) -> Option<(Vec<Q>, Vec<Vec<Q>>)> {
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x0 = vec![Q::zero(); n];
    for (row, &c) in aug.iter().zip(&pivots) {
        x0[c] = row[n].clone();
    }
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for free in (0..n).filter(|&j| !is_pivot[j]) {
        let mut v = vec![Q::zero(); n];
        v[free] = Q::one();
        for (row, &c) in aug.iter().zip(&pivots) {
            v[c] = -row[free].clone();
        }
        basis.push(v);
    }
    Some((x0, basis))
}

/// Affine hull of a nonempty point set.
#[derive(Clone, Debug)]
pub struct AffineHull {
    /// Independent equalities `a·x = β` cutting out the hull.
    pub equalities: Vec<(Vec<Q>, Q)>,
    /// Coordinates on which the projection of the hull is injective and
    /// full-dimensional.
    pub pivots: Vec<usize>,
}

pub fn affine_hull(points: &[Vec<Q>]) -> AffineHull {
    let n = points[0].len();
    let base = &points[0];
    let mut dirs: Vec<Vec<Q>> = points[1..].iter().map(|p| p.iter().zip(base).map(|(x, y)| x - y).collect()).collect();
    let pivots = if dirs.is_empty() { Vec::new() } else { rref(&mut dirs) };
    // normals: null space of the direction matrix
    let (_, normals) = solve_affine(&dirs, &vec![Q::zero(); dirs.len()], n).expect("homogeneous system");
    let equalities = normals
        .into_iter()
        .map(|a| {
            let beta = crate::rational::dot(&a, base);
            (a, beta)
        })
        .collect();
    AffineHull { equalities, pivots }
}

/// Solves the square system `A x = b` with a unique solution.
pub fn solve_unique(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.first().map_or(0, Vec::len);
    let (x, basis) = solve_affine(a, b, n)?;
    basis.is_empty().then_some(x)
}
