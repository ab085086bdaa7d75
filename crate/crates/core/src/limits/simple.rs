use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{check_dim, triple_product, LimitsError};
use crate::rational::Q;

/// SimplE parameters for the rule `R(X,Y) ∧ S(Y,Z) → T(X,Z)`, where each
/// relation has a forward and an inverse vector and one threshold per
/// vector. A triple is accepted when the triple product reaches its
/// threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplEComposition {
    #[serde(with = "crate::dump::q_vec")]
    pub r: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub ri: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub s: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub si: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub t: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub ti: Vec<Q>,
    /// Thresholds for r, ri, s, si, t, ti in that order.
    #[serde(with = "crate::dump::q_vec")]
    pub lambdas: Vec<Q>,
}

/// Head and tail vectors of the three entities bound to X, Y and Z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplEWitness {
    #[serde(with = "crate::dump::q_vec")]
    pub e_h: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub e_t: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub f_h: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub f_t: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub g_h: Vec<Q>,
    #[serde(with = "crate::dump::q_vec")]
    pub g_t: Vec<Q>,
    #[serde(with = "crate::dump::q_str")]
    pub k: Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialRule {
    /// `R(X,Y) ∧ S(Y,Z) → ⊥`: some body factor is identically zero with a
    /// positive threshold.
    BodyUnsatisfiable,
    /// `⊤ → T(X,Z)`: `t = ti = 0` with nonpositive thresholds.
    HeadValid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum SimplEOutcome {
    Counterexample(SimplEWitness),
    RuleTrivial { rule: TrivialRule },
}

impl SimplEComposition {
    /// The four body values and two head values at a witness.
    pub fn values(&self, w: &SimplEWitness) -> [Q; 6] {
        [
            triple_product(&w.e_h, &self.r, &w.f_t),
            triple_product(&w.f_h, &self.ri, &w.e_t),
            triple_product(&w.f_h, &self.s, &w.g_t),
            triple_product(&w.g_h, &self.si, &w.f_t),
            triple_product(&w.e_h, &self.t, &w.g_t),
            triple_product(&w.g_h, &self.ti, &w.e_t),
        ]
    }

    /// Body holds and head fails.
    pub fn refuted_by(&self, w: &SimplEWitness) -> bool {
        let v = self.values(w);
        let l = &self.lambdas;
        (0..4).all(|i| v[i] >= l[i]) && !(v[4] >= l[4] && v[5] >= l[5])
    }
}

fn sg(x: &Q) -> Q {
    if x.is_negative() {
        -Q::one()
    } else {
        Q::one()
    }
}

fn build(k: &Q, n: usize, gen: impl Fn(usize) -> [Q; 6]) -> SimplEWitness {
    let mut w = SimplEWitness {
        e_h: Vec::with_capacity(n),
        e_t: Vec::with_capacity(n),
        f_h: Vec::with_capacity(n),
        f_t: Vec::with_capacity(n),
        g_h: Vec::with_capacity(n),
        g_t: Vec::with_capacity(n),
        k: k.clone(),
    };
    for i in 0..n {
        let [eh, et, fh, ft, gh, gt] = gen(i);
        w.e_h.push(eh);
        w.e_t.push(et);
        w.f_h.push(fh);
        w.f_t.push(ft);
        w.g_h.push(gh);
        w.g_t.push(gt);
    }
    w
}

/// Either entity vectors satisfying the body of the composition rule while
/// violating its head, or the trivial rule the parameters satisfy. The
/// scale `K` doubles from 1 until the witness checks out exactly.
pub fn simple_composition_counterexample(c: &SimplEComposition) -> Result<SimplEOutcome, LimitsError> {
    let n = c.r.len();
    for v in [&c.ri, &c.s, &c.si, &c.t, &c.ti] {
        check_dim(n, v.len())?;
    }
    check_dim(6, c.lambdas.len())?;
    let zero = |v: &[Q]| v.iter().all(Zero::is_zero);
    let l = &c.lambdas;
    if zero(&c.t) && zero(&c.ti) && !l[4].is_positive() && !l[5].is_positive() {
        return Ok(SimplEOutcome::RuleTrivial { rule: TrivialRule::HeadValid });
    }
    let body = [&c.r, &c.ri, &c.s, &c.si];
    if body.iter().zip(l).any(|(v, lam)| zero(v) && lam.is_positive()) {
        return Ok(SimplEOutcome::RuleTrivial { rule: TrivialRule::BodyUnsatisfiable });
    }
    // break the first head atom when possible, otherwise the inverse one
    let forward = !zero(&c.t) || l[4].is_positive();
    let mut k = Q::one();
    for _ in 0..=60 {
        let w = if forward {
            build(&k, n, |i| {
                let (r, ri, s, si, t) = (sg(&c.r[i]), sg(&c.ri[i]), sg(&c.s[i]), sg(&c.si[i]), sg(&c.t[i]));
                [Q::one(), -&k * &t * &s * &ri, -&k * &t * &s, &k * &r, &k * &r * &si, -&k * &t]
            })
        } else {
            build(&k, n, |i| {
                let (r, ri, s, si, ti) = (sg(&c.r[i]), sg(&c.ri[i]), sg(&c.s[i]), sg(&c.si[i]), sg(&c.ti[i]));
                [&k * &si * &r, -&k * &ti, -&k * &ti * &ri, &k * &si, Q::one(), -&k * &ti * &ri * &s]
            })
        };
        if c.refuted_by(&w) {
            return Ok(SimplEOutcome::Counterexample(w));
        }
        k *= Q::from_integer(2.into());
    }
    Err(LimitsError::ScaleCapExceeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    fn comp(vs: [&[i64]; 6], lambdas: [i64; 6]) -> SimplEComposition {
        SimplEComposition {
            r: v(vs[0]),
            ri: v(vs[1]),
            s: v(vs[2]),
            si: v(vs[3]),
            t: v(vs[4]),
            ti: v(vs[5]),
            lambdas: lambdas.map(q).to_vec(),
        }
    }

    #[test]
    fn trivial_rules() {
        let head = comp([&[1, 2], &[1, 1], &[3, -1], &[1, 0], &[0, 0], &[0, 0]], [1, 1, 1, 1, 0, -2]);
        assert_eq!(
            simple_composition_counterexample(&head).unwrap(),
            SimplEOutcome::RuleTrivial { rule: TrivialRule::HeadValid }
        );
        let body = comp([&[0, 0], &[1, 1], &[3, -1], &[1, 0], &[1, 1], &[0, 0]], [1, 1, 1, 1, 1, 1]);
        assert_eq!(
            simple_composition_counterexample(&body).unwrap(),
            SimplEOutcome::RuleTrivial { rule: TrivialRule::BodyUnsatisfiable }
        );
    }

    #[test]
    fn counterexamples() {
        let c = comp([&[1, -2, 3], &[2, 1, -1], &[-1, -1, 4], &[5, 0, 1], &[1, 1, -3], &[0, 2, 2]], [1; 6]);
        match simple_composition_counterexample(&c).unwrap() {
            SimplEOutcome::Counterexample(w) => assert!(c.refuted_by(&w)),
            other => panic!("{other:?}"),
        }
        // only the inverse head vector is nonzero
        let inv = comp([&[1, 0], &[0, -1], &[2, 2], &[-1, 3], &[0, 0], &[1, -1]], [2, 2, 2, 2, -1, 1]);
        match simple_composition_counterexample(&inv).unwrap() {
            SimplEOutcome::Counterexample(w) => assert!(inv.refuted_by(&w)),
            other => panic!("{other:?}"),
        }
        // zero head vectors but a positive threshold: the head never holds
        let never = comp([&[1], &[1], &[1], &[1], &[0], &[0]], [3, 3, 3, 3, 1, 0]);
        assert!(matches!(simple_composition_counterexample(&never).unwrap(), SimplEOutcome::Counterexample(_)));
    }

    fn vec3() -> impl Strategy<Value = Vec<Q>> {
        prop::collection::vec((-3i64..=3).prop_map(q), 3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn outcome_is_justified(r in vec3(), ri in vec3(), s in vec3(), si in vec3(), t in vec3(), ti in vec3(),
                                lambdas in prop::array::uniform6(-5i64..=5)) {
            let c = SimplEComposition { r, ri, s, si, t, ti, lambdas: lambdas.map(q).to_vec() };
            match simple_composition_counterexample(&c).unwrap() {
                SimplEOutcome::Counterexample(w) => prop_assert!(c.refuted_by(&w)),
                SimplEOutcome::RuleTrivial { rule: TrivialRule::HeadValid } => {
                    prop_assert!(c.t.iter().chain(&c.ti).all(Zero::is_zero));
                    prop_assert!(!c.lambdas[4].is_positive() && !c.lambdas[5].is_positive());
                }
                SimplEOutcome::RuleTrivial { rule: TrivialRule::BodyUnsatisfiable } => {
                    let body = [&c.r, &c.ri, &c.s, &c.si];
                    prop_assert!(body.iter().zip(&c.lambdas).any(|(v, l)| v.iter().all(Zero::is_zero) && l.is_positive()));
                }
            }
        }
    }
}
