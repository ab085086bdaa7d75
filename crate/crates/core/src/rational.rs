//! Exact rational scalars and small helpers around them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used throughout the geometric core.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"p/q"` or `"p"` (optionally signed). Returns `None` on malformed
/// input or a zero denominator.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Q::new(num, den))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise (reduced,
/// positive denominator).
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Least common multiple of the denominators, used to clear fractions.
pub fn denominator_lcm(xs: &[Q]) -> BigInt {
    use num_integer::Integer;
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Scales a rational row to a primitive integer row with the same sign
/// pattern.
pub fn to_integer_row(xs: &[Q]) -> Vec<BigInt> {
    let l = denominator_lcm(xs);
    let row: Vec<BigInt> = xs.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    primitive(row)
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(mut row: Vec<BigInt>) -> Vec<BigInt> {
    use num_integer::Integer;
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in &mut row {
            *x = &*x / &g;
        }
    }
    row
}
