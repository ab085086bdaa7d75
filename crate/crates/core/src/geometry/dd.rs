//! Double description method: extreme rays of pointed polyhedral cones
//! `{x : A x ≥ 0}` over the integers.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::linalg::{rank, rref};
use crate::rational::{primitive, to_integer_row, Q};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DdError {
    #[error("cone is not pointed (constraint rank {rank} < dimension {dim})")]
    NotPointed { rank: usize, dim: usize },
    #[error("intermediate ray count exceeded {0}")]
    TooManyRays(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn contains_all(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    v: Vec<BigInt>,
    zeros: Bits,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Extreme rays of `{x ∈ R^dim : row·x ≥ 0 for all rows}`, as primitive
/// integer vectors. The cone must be pointed.
pub fn extreme_rays(rows: &[Vec<BigInt>], dim: usize, max_rays: usize) -> Result<Vec<Vec<BigInt>>, DdError> {
    let mut uniq: Vec<Vec<BigInt>> = Vec::new();
    for r in rows {
        let p = primitive(r.clone());
        if p.iter().any(|x| !x.is_zero()) && !uniq.contains(&p) {
            uniq.push(p);
        }
    }
    let as_q: Vec<Vec<Q>> = uniq.iter().map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect()).collect();
    let full_rank = rank(&as_q);
    if full_rank < dim {
        return Err(DdError::NotPointed { rank: full_rank, dim });
    }
    // greedy choice of dim independent rows for the initial simplicial cone
    let mut chosen: Vec<usize> = Vec::new();
    let mut acc: Vec<Vec<Q>> = Vec::new();
    for (i, r) in as_q.iter().enumerate() {
        let mut trial = acc.clone();
        trial.push(r.clone());
        if rank(&trial) > acc.len() {
            acc = trial;
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    let order: Vec<usize> = chosen.iter().copied().chain((0..uniq.len()).filter(|i| !chosen.contains(i))).collect();
    let nrows = order.len();
    // columns of B^{-1}: solve B r_j = e_j via [B | I] reduction
    let mut aug: Vec<Vec<Q>> = chosen
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut r = as_q[i].clone();
            r.extend((0..dim).map(|j| if j == k { Q::from_integer(1.into()) } else { Q::zero() }));
            r
        })
        .collect();
    rref(&mut aug);
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let col: Vec<Q> = aug.iter().map(|r| r[dim + j].clone()).collect();
            let mut zeros = Bits::new(nrows);
            for k in (0..dim).filter(|&k| k != j) {
                zeros.set(k);
            }
            Ray { v: to_integer_row(&col), zeros }
        })
        .collect();
    for (pos, &ri) in order.iter().enumerate().skip(dim) {
        let a = &uniq[ri];
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.v)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.zeros.set(pos);
                }
            }
            continue;
        }
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &plus {
            for &n in &minus {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|k| k == p || k == n || !rays[k].zeros.contains_all(&common));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> =
                    rays[n].v.iter().zip(&rays[p].v).map(|(xn, xp)| &vals[p] * xn - &vals[n] * xp).collect();
                let mut zeros = common;
                zeros.set(pos);
                fresh.push(Ray { v: primitive(v), zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (r, v) in rays.into_iter().zip(&vals) {
            if v.is_negative() {
                continue;
            }
            let mut r = r;
            if v.is_zero() {
                r.zeros.set(pos);
            }
            next.push(r);
        }
        next.extend(fresh);
        if next.len() > max_rays {
            return Err(DdError::TooManyRays(max_rays));
        }
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(xs: &[&[i64]]) -> Vec<Vec<BigInt>> {
        xs.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn sorted(mut v: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
        v.sort();
        v
    }

    #[test]
    fn orthant() {
        let r = extreme_rays(&rows(&[&[1, 0], &[0, 1]]), 2, 100).unwrap();
        assert_eq!(sorted(r), rows(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn square_pyramid_cone() {
        // homogenized unit square: (x, y, s) with 0 <= x <= s, 0 <= y <= s
        let r = extreme_rays(&rows(&[&[1, 0, 0], &[0, 1, 0], &[-1, 0, 1], &[0, -1, 1]]), 3, 100).unwrap();
        assert_eq!(sorted(r), rows(&[&[0, 0, 1], &[0, 1, 1], &[1, 0, 1], &[1, 1, 1]]));
    }

    #[test]
    fn not_pointed() {
        assert_eq!(extreme_rays(&rows(&[&[1, 0]]), 2, 100), Err(DdError::NotPointed { rank: 1, dim: 2 }));
    }

    #[test]
    fn redundant_constraints_are_harmless() {
        let r = extreme_rays(&rows(&[&[1, 0], &[0, 1], &[1, 1], &[2, 2], &[1, 0]]), 2, 100).unwrap();
        assert_eq!(sorted(r), rows(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn degenerate_apex() {
        // square pyramid apex at the origin of the cone over an octahedron face set
        let r = extreme_rays(&rows(&[&[1, 1, 1], &[1, -1, 1], &[-1, 1, 1], &[-1, -1, 1], &[0, 0, 1]]), 3, 100).unwrap();
        assert_eq!(sorted(r), rows(&[&[-1, 0, 1], &[0, -1, 1], &[0, 1, 1], &[1, 0, 1]]));
    }
}
