//! Exact feasibility linear programming: dense tableau simplex over the
//! rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::rational::Q;

/// Finds `x ≥ 0` with `A x = b`, or `None` if there is none.
pub fn feasible_nonneg(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.first().map_or(0, Vec::len);
    let rows = a.len();
    if rows == 0 {
        return Some(vec![Q::zero(); n]);
    }
    // tableau rows are [coefficients | rhs], rhs made nonnegative
    let mut t: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            if bi.is_negative() {
                for x in r.iter_mut() {
                    *x = -x.clone();
                }
            }
            r
        })
        .collect();
    // artificial variables occupy indices n..n+rows and never re-enter
    let mut basis: Vec<usize> = (n..n + rows).collect();
    let mut obj = vec![Q::zero(); n + 1];
    for r in &t {
        for (o, x) in obj.iter_mut().zip(r) {
            *o -= x;
        }
    }
    while let Some(enter) = (0..n).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for (i, r) in t.iter().enumerate() {
            if !r[enter].is_positive() {
                continue;
            }
            let ratio = &r[n] / &r[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // unbounded direction cannot occur: the phase-one objective is bounded below
        let (p, _) = leave.expect("phase one is bounded");
        pivot(&mut t, &mut obj, p, enter);
        basis[p] = enter;
    }
    if !obj[n].is_zero() {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &bv) in t.iter().zip(&basis) {
        if bv < n {
            x[bv] = r[n].clone();
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<Q>], obj: &mut [Q], p: usize, col: usize) {
    let inv = t[p][col].recip();
    for x in t[p].iter_mut() {
        if !x.is_zero() {
            *x *= &inv;
        }
    }
    let prow = t[p].clone();
    let eliminate = |row: &mut [Q]| {
        if row[col].is_zero() {
            return;
        }
        let f = row[col].clone();
        for (x, y) in row.iter_mut().zip(&prow) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    };
    for (i, row) in t.iter_mut().enumerate() {
        if i != p {
            eliminate(row);
        }
    }
    eliminate(obj);
}

/// A linear system over named columns: equalities, `≤` inequalities and a
/// choice of free or nonnegative variables.
#[derive(Clone, Debug, Default)]
pub struct LpSystem {
    n: usize,
    free: Vec<bool>,
    eqs: Vec<(Vec<Q>, Q)>,
    les: Vec<(Vec<Q>, Q)>,
}

impl LpSystem {
    /// `n` variables, all nonnegative until marked free.
    pub fn new(n: usize) -> Self {
        LpSystem { n, free: vec![false; n], eqs: Vec::new(), les: Vec::new() }
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn add_eq(&mut self, a: Vec<Q>, b: Q) {
        debug_assert_eq!(a.len(), self.n);
        self.eqs.push((a, b));
    }

    pub fn add_le(&mut self, a: Vec<Q>, b: Q) {
        debug_assert_eq!(a.len(), self.n);
        self.les.push((a, b));
    }

    /// Any feasible point, or `None`.
    pub fn solve(&self) -> Option<Vec<Q>> {
        // columns: x (or x+), x- for free vars, one slack per inequality
        let free_idx: Vec<usize> = (0..self.n).filter(|&j| self.free[j]).collect();
        let cols = self.n + free_idx.len() + self.les.len();
        let mut a = Vec::with_capacity(self.eqs.len() + self.les.len());
        let mut b = Vec::with_capacity(a.capacity());
        let expand = |row: &[Q]| {
            let mut r = vec![Q::zero(); cols];
            r[..self.n].clone_from_slice(row);
            for (k, &j) in free_idx.iter().enumerate() {
                r[self.n + k] = -row[j].clone();
            }
            r
        };
        for (row, rhs) in &self.eqs {
            a.push(expand(row));
            b.push(rhs.clone());
        }
        for (s, (row, rhs)) in self.les.iter().enumerate() {
            let mut r = expand(row);
            r[self.n + free_idx.len() + s] = Q::from_integer(1.into());
            a.push(r);
            b.push(rhs.clone());
        }
        let y = feasible_nonneg(&a, &b)?;
        let mut x = y[..self.n].to_vec();
        for (k, &j) in free_idx.iter().enumerate() {
            x[j] -= &y[self.n + k];
        }
        Some(x)
    }
}
