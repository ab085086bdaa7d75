use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, LimitsError, Matrix};
use crate::rational::{from_f64, Q};

/// A relation holding at `(e, f)` iff `eᵀ M f ≥ lambda`. In terms of the
/// score `-eᵀ M f` this is the region `score ≤ -lambda`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilinearRelation {
    #[serde(with = "crate::dump::q_mat")]
    pub m: Matrix,
    #[serde(with = "crate::dump::q_str")]
    pub lambda: Q,
}

impl BilinearRelation {
    pub fn new(m: Matrix, lambda: Q) -> Self {
        BilinearRelation { m, lambda }
    }

    pub fn holds(&self, e: &[Q], f: &[Q]) -> bool {
        bilinear_form(&self.m, e, f).expect("square matrix") >= self.lambda
    }
}

pub fn bilinear_form(m: &Matrix, e: &[Q], f: &[Q]) -> Result<Q, LimitsError> {
    check_dim(m.len(), e.len())?;
    let mut total = Q::zero();
    for (ei, row) in e.iter().zip(m) {
        check_dim(row.len(), f.len())?;
        if ei.is_zero() {
            continue;
        }
        let rf: Q = row.iter().zip(f).map(|(a, b)| a * b).sum();
        total += ei * rf;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BilinearDecision {
    /// `R ⊑ S` holds and `M_r = alpha · M_s`.
    Satisfied {
        #[serde(with = "crate::dump::q_str")]
        alpha: Q,
    },
    /// `S` holds for every pair (`M_s = 0`, `λ_s ≤ 0`), so any `R` is subsumed.
    HeadTrivial,
    /// `R` holds at `(e, f)` and `S` does not.
    Counterexample {
        #[serde(with = "crate::dump::q_vec")]
        e: Vec<Q>,
        #[serde(with = "crate::dump::q_vec")]
        f: Vec<Q>,
    },
}

fn is_zero_matrix(m: &Matrix) -> bool {
    m.iter().flatten().all(Zero::is_zero)
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn scaled_unit(n: usize, i: usize, x: Q) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = x;
    v
}

/// `c` with `a = c · b`, if any; `b` must be nonzero.
fn proportion(a: &Matrix, b: &Matrix) -> Option<Q> {
    let (i, j) = (0..b.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).find(|&(i, j)| !b[i][j].is_zero())?;
    let c = &a[i][j] / &b[i][j];
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| *x == &c * y).then_some(c)
}

fn first_nonzero(m: &Matrix) -> (usize, usize) {
    let n = m.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero()).expect("nonzero matrix")
}

fn transpose(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect()
}

fn row_combination(m: &Matrix, e: &[Q]) -> Vec<Q> {
    let n = m.len();
    (0..n).map(|j| e.iter().zip(m).map(|(x, row)| x * &row[j]).sum()).collect()
}

/// For some `e`, the linear functionals `eᵀ M_r` and `eᵀ M_s` are
/// independent; then `f` can be chosen so both forms take any values.
/// Checking unit vectors and sums of two unit vectors is enough: the 2x2
/// minors are quadratic in `e`, so vanishing there means vanishing
/// everywhere.
fn independent_rows(mr: &Matrix, ms: &Matrix, lr: &Q, target_s: &Q) -> Option<(Vec<Q>, Vec<Q>)> {
    let n = mr.len();
    let mut cands: Vec<Vec<Q>> = (0..n).map(|i| unit(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let mut e = unit(n, i);
            e[j] = Q::one();
            cands.push(e);
        }
    }
    for e in cands {
        let rho = row_combination(mr, &e);
        let sigma = row_combination(ms, &e);
        for l in 0..n {
            for m in l + 1..n {
                let det = &rho[l] * &sigma[m] - &rho[m] * &sigma[l];
                if det.is_zero() {
                    continue;
                }
                // x ρ_l + y ρ_m = λ_r, x σ_l + y σ_m = target
                let x = (lr * &sigma[m] - target_s * &rho[m]) / &det;
                let y = (&rho[l] * target_s - &sigma[l] * lr) / &det;
                let mut f = vec![Q::zero(); n];
                f[l] = x;
                f[m] = y;
                return Some((e, f));
            }
        }
    }
    None
}

/// Decides `eᵀ M_r f ≥ λ_r ⇒ eᵀ M_s f ≥ λ_s` for all real `e, f`.
/// Counterexamples are exact and re-checked.
pub fn bilinear_rule_decision(r: &BilinearRelation, s: &BilinearRelation) -> Result<BilinearDecision, LimitsError> {
    let n = s.m.len();
    check_dim(n, r.m.len())?;
    for row in r.m.iter().chain(&s.m) {
        check_dim(n, row.len())?;
    }
    let zr = is_zero_matrix(&r.m);
    let zs = is_zero_matrix(&s.m);
    if zs && !s.lambda.is_positive() {
        return Ok(BilinearDecision::HeadTrivial);
    }
    if zr && r.lambda.is_positive() {
        return Ok(BilinearDecision::Satisfied { alpha: Q::zero() });
    }
    let below_s = &s.lambda - Q::one();
    let (e, f) = if zs {
        // S never holds; any pair in R will do
        if zr {
            (vec![Q::zero(); n], vec![Q::zero(); n])
        } else {
            let (k, l) = first_nonzero(&r.m);
            (unit(n, k), scaled_unit(n, l, &r.lambda / &r.m[k][l]))
        }
    } else if zr {
        // R always holds
        let (k, l) = first_nonzero(&s.m);
        (unit(n, k), scaled_unit(n, l, &below_s / &s.m[k][l]))
    } else if let Some(c) = proportion(&r.m, &s.m) {
        // eᵀ M_r f = c · b with b = eᵀ M_s f ranging over all reals
        let b = if c.is_positive() {
            let threshold = &r.lambda / &c;
            if threshold >= s.lambda {
                return Ok(BilinearDecision::Satisfied { alpha: c });
            }
            threshold
        } else if c.is_negative() {
            below_s.clone().min(&r.lambda / &c)
        } else {
            unreachable!("M_r is nonzero")
        };
        let (k, l) = first_nonzero(&s.m);
        (unit(n, k), scaled_unit(n, l, b / &s.m[k][l]))
    } else if let Some(ef) = independent_rows(&r.m, &s.m, &r.lambda, &below_s) {
        ef
    } else if let Some((f, e)) = independent_rows(&transpose(&r.m), &transpose(&s.m), &r.lambda, &below_s) {
        (e, f)
    } else {
        unreachable!("matrices that are dependent along every row and column combination are proportional")
    };
    debug_assert!(r.holds(&e, &f) && !s.holds(&e, &f), "counterexample re-check");
    Ok(BilinearDecision::Counterexample { e, f })
}

/// Looks for a pair refuting `R ⊑ S` by sampling `f64` vectors in
/// `[-10, 10]^n`. Any hit is converted to rationals and re-checked exactly,
/// so a returned pair is a genuine counterexample.
pub fn falsify_bilinear(
    r: &BilinearRelation,
    s: &BilinearRelation,
    samples: usize,
    seed: u64,
) -> Option<(Vec<Q>, Vec<Q>)> {
    let n = r.m.len();
    let to_f = |m: &Matrix| -> Vec<Vec<f64>> {
        m.iter().map(|row| row.iter().map(crate::rational::to_f64).collect()).collect()
    };
    let (mr, ms) = (to_f(&r.m), to_f(&s.m));
    let (lr, ls) = (crate::rational::to_f64(&r.lambda), crate::rational::to_f64(&s.lambda));
    let form = |m: &Vec<Vec<f64>>, e: &[f64], f: &[f64]| -> f64 {
        (0..n).map(|i| e[i] * (0..n).map(|j| m[i][j] * f[j]).sum::<f64>()).sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        if form(&mr, &e, &f) >= lr && form(&ms, &e, &f) < ls {
            let eq: Vec<Q> = e.iter().map(|&x| from_f64(x).expect("finite")).collect();
            let fq: Vec<Q> = f.iter().map(|&x| from_f64(x).expect("finite")).collect();
            if r.holds(&eq, &fq) && !s.holds(&eq, &fq) {
                return Some((eq, fq));
            }
        }
    }
    None
}

/// Relations subsumed by a common `S`, arranged into two chains in which
/// each relation implies the next. `positive` holds the relations with
/// `λ > 0`, `nonpositive` the rest; entries are input indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyShape {
    pub positive: Vec<usize>,
    pub nonpositive: Vec<usize>,
}

/// Every relation subsumed by `s` is `{eᵀ M_s f ≥ θ}` with `θ = λ/α`, or
/// empty when `α = 0`. Sorting by `θ` descending gives implication chains.
pub fn bilinear_hierarchy_shape(
    relations: &[BilinearRelation],
    s: &BilinearRelation,
) -> Result<HierarchyShape, LimitsError> {
    // None stands for an empty relation, which implies everything
    let mut keyed: Vec<(usize, Option<Q>)> = Vec::with_capacity(relations.len());
    for (i, r) in relations.iter().enumerate() {
        match bilinear_rule_decision(r, s)? {
            BilinearDecision::Satisfied { alpha } if alpha.is_zero() => keyed.push((i, None)),
            BilinearDecision::Satisfied { alpha } => keyed.push((i, Some(&r.lambda / alpha))),
            BilinearDecision::HeadTrivial => return Err(LimitsError::DegenerateHead),
            BilinearDecision::Counterexample { .. } => return Err(LimitsError::NotAllSatisfied(i)),
        }
    }
    let order = |chain: Vec<(usize, Option<Q>)>| -> Vec<usize> {
        let mut chain = chain;
        chain.sort_by(|a, b| match (&a.1, &b.1) {
            (None, None) => a.0.cmp(&b.0),
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => y.cmp(x).then(a.0.cmp(&b.0)),
        });
        chain.into_iter().map(|(i, _)| i).collect()
    };
    let (pos, nonpos): (Vec<_>, Vec<_>) = keyed.into_iter().partition(|(i, _)| relations[*i].lambda.is_positive());
    let shape = HierarchyShape { positive: order(pos), nonpositive: order(nonpos) };
    for chain in [&shape.positive, &shape.nonpositive] {
        for w in chain.windows(2) {
            let d = bilinear_rule_decision(&relations[w[0]], &relations[w[1]])?;
            debug_assert!(!matches!(d, BilinearDecision::Counterexample { .. }), "chain link {w:?}");
        }
    }
    Ok(shape)
}
