//! Exact convex geometry over the rationals and geometric interpretations of
//! knowledge bases.

pub mod dd;
mod interp;
pub mod linalg;
pub mod lp;
mod one_hot;
mod polytope;
mod witness;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::{fmt_q, Q};

pub use interp::GeometricInterpretation;
pub use one_hot::{
    build_extended_trivial, build_prop3_model, compact_datalog_model, object_order, ExtendedGeometricInterpretation,
};
pub use polytope::{HRep, Polytope, HREP_MAX_DIM, HREP_MAX_VERTICES};
pub use witness::{synthesize_null_witnesses, WitnessError, DEFAULT_MAX_ROUNDS};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("object {0} already has a point")]
    NameCollision(String),
    #[error("interpretation does not come from the one-hot construction: {0}")]
    NotOneHotBase(String),
}

/// A point of R^d with exact rational coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    #[serde(with = "crate::dump::q_vec")]
    pub coords: Vec<Q>,
}

impl Point {
    pub fn new(coords: Vec<Q>) -> Self {
        Point { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Point { coords: vec![Q::from_integer(0.into()); dim] }
    }

    /// The `i`-th standard basis vector of R^dim.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut p = Point::zeros(dim);
        p.coords[i] = Q::from_integer(1.into());
        p
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Point { coords: xs.iter().map(|&x| crate::rational::q(x)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scale(&self, s: &Q) -> Point {
        Point { coords: self.coords.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Point) -> Point {
        Point { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }

    /// Coordinates `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Point {
        Point { coords: self.coords[start..start + len].to_vec() }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(fmt_q).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Concatenation of points, in order.
pub fn concat<'a>(points: impl IntoIterator<Item = &'a Point>) -> Point {
    Point { coords: points.into_iter().flat_map(|p| p.coords.iter().cloned()).collect() }
}

/// Convex combination `Σ w_i p_i`.
pub fn combination(weights: &[Q], points: &[&Point]) -> Point {
    let dim = points.first().map_or(0, |p| p.dim());
    let mut out = Point::zeros(dim);
    for (w, p) in weights.iter().zip(points) {
        for (o, x) in out.coords.iter_mut().zip(&p.coords) {
            *o += w * x;
        }
    }
    out
}
