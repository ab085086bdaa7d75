//! Scoring functions of common knowledge graph embedding models, their
//! region view, and constructive arguments for what they cannot express.
//!
//! Scores follow the usual convention: lower means more plausible, and a
//! triple `(e, R, f)` is accepted iff `score ≤ λ_R`.

mod bilinear;
mod simple;
mod translation;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{frac, Q};

pub use bilinear::{
    bilinear_form, bilinear_hierarchy_shape, bilinear_rule_decision, falsify_bilinear, BilinearDecision,
    BilinearRelation, HierarchyShape,
};
pub use simple::{simple_composition_counterexample, SimplEComposition, SimplEOutcome, SimplEWitness, TrivialRule};
pub use translation::{
    translation_graph_properties, translation_subsumption_demo, GraphProperty, GraphViolation, Premise,
    PremiseViolated, SubsumptionStep,
};

pub type Matrix = Vec<Vec<Q>>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LimitsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {0} does not imply the common head")]
    NotAllSatisfied(usize),
    #[error("the head relation holds everywhere, so subsumption says nothing")]
    DegenerateHead,
    #[error("no witness found with scale factors up to 2^60")]
    ScaleCapExceeded,
}

/// Relation parameters of one embedding model. Entity vectors have the
/// model's entity dimension: `n` for most, `2n` for ComplEx (real part then
/// imaginary part) and SimplE (head vector then tail vector).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Scorer {
    /// `‖e + r - f‖₁`
    TransE {
        #[serde(with = "crate::dump::q_vec")]
        r: Vec<Q>,
    },
    /// `‖M_h e + r - M_t f‖₁`
    STransE {
        #[serde(with = "crate::dump::q_vec")]
        r: Vec<Q>,
        #[serde(with = "crate::dump::q_mat")]
        mh: Matrix,
        #[serde(with = "crate::dump::q_mat")]
        mt: Matrix,
    },
    /// `-Σ e_i r_i f_i`
    DistMult {
        #[serde(with = "crate::dump::q_vec")]
        r: Vec<Q>,
    },
    /// `-Re(Σ e_i r_i conj(f_i))`
    ComplEx {
        #[serde(with = "crate::dump::q_vec")]
        re: Vec<Q>,
        #[serde(with = "crate::dump::q_vec")]
        im: Vec<Q>,
    },
    /// `-eᵀ M f`
    Rescal {
        #[serde(with = "crate::dump::q_mat")]
        m: Matrix,
    },
    /// `-½(⟨e_h, r, f_t⟩ + ⟨f_h, ri, e_t⟩)`
    SimplE {
        #[serde(with = "crate::dump::q_vec")]
        r: Vec<Q>,
        #[serde(with = "crate::dump::q_vec")]
        ri: Vec<Q>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub scorer: Scorer,
    #[serde(with = "crate::dump::q_str")]
    pub lambda: Q,
}

impl Scorer {
    /// Dimension of entity vectors.
    pub fn entity_dim(&self) -> usize {
        match self {
            Scorer::TransE { r } | Scorer::DistMult { r } | Scorer::STransE { r, .. } => r.len(),
            Scorer::Rescal { m } => m.len(),
            Scorer::ComplEx { re, .. } => 2 * re.len(),
            Scorer::SimplE { r, .. } => 2 * r.len(),
        }
    }

    /// The matrix `M` with `score = -eᵀ M f`, for the bilinear models.
    pub fn as_bilinear(&self) -> Option<Matrix> {
        match self {
            Scorer::Rescal { m } => Some(m.clone()),
            Scorer::DistMult { r } => Some(diag(r)),
            Scorer::ComplEx { re, im } => {
                let n = re.len();
                let mut m = vec![vec![Q::zero(); 2 * n]; 2 * n];
                for i in 0..n {
                    m[i][i] = re[i].clone();
                    m[n + i][n + i] = re[i].clone();
                    m[i][n + i] = im[i].clone();
                    m[n + i][i] = -im[i].clone();
                }
                Some(m)
            }
            _ => None,
        }
    }
}

fn diag(r: &[Q]) -> Matrix {
    (0..r.len()).map(|i| (0..r.len()).map(|j| if i == j { r[i].clone() } else { Q::zero() }).collect()).collect()
}

fn check_dim(expected: usize, got: usize) -> Result<(), LimitsError> {
    if expected == got {
        Ok(())
    } else {
        Err(LimitsError::DimensionMismatch { expected, got })
    }
}

fn mat_vec(m: &Matrix, x: &[Q]) -> Result<Vec<Q>, LimitsError> {
    m.iter()
        .map(|row| {
            check_dim(row.len(), x.len())?;
            Ok(row.iter().zip(x).map(|(a, b)| a * b).sum())
        })
        .collect()
}

fn l1(xs: impl Iterator<Item = Q>) -> Q {
    xs.map(|x| x.abs()).sum()
}

/// `⟨a, b, c⟩ = Σ a_i b_i c_i`
pub fn triple_product(a: &[Q], b: &[Q], c: &[Q]) -> Q {
    a.iter().zip(b).zip(c).map(|((x, y), z)| x * y * z).sum()
}

pub fn score(scorer: &Scorer, e: &[Q], f: &[Q]) -> Result<Q, LimitsError> {
    let d = scorer.entity_dim();
    check_dim(d, e.len())?;
    check_dim(d, f.len())?;
    Ok(match scorer {
        Scorer::TransE { r } => l1(e.iter().zip(r).zip(f).map(|((a, b), c)| a + b - c)),
        Scorer::STransE { r, mh, mt } => {
            check_dim(d, mh.len())?;
            check_dim(d, mt.len())?;
            let he = mat_vec(mh, e)?;
            let tf = mat_vec(mt, f)?;
            l1(he.iter().zip(r).zip(&tf).map(|((a, b), c)| a + b - c))
        }
        Scorer::DistMult { r } => -triple_product(e, r, f),
        Scorer::ComplEx { re, im } => {
            let n = re.len();
            check_dim(n, im.len())?;
            let (er, ei) = e.split_at(n);
            let (fr, fi) = f.split_at(n);
            -triple_product(er, re, fr) - triple_product(er, im, fi) - triple_product(ei, re, fi)
                + triple_product(ei, im, fr)
        }
        Scorer::Rescal { m } => -bilinear_form(m, e, f)?,
        Scorer::SimplE { r, ri } => {
            let n = r.len();
            check_dim(n, ri.len())?;
            let (eh, et) = e.split_at(n);
            let (fh, ft) = f.split_at(n);
            -(triple_product(eh, r, ft) + triple_product(fh, ri, et)) * frac(1, 2)
        }
    })
}

pub fn in_region(rel: &Relation, e: &[Q], f: &[Q]) -> Result<bool, LimitsError> {
    Ok(score(&rel.scorer, e, f)? <= rel.lambda)
}

/// `(head entity, relation, tail entity)`
pub type Triple = (String, String, String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub separates: bool,
    pub failing: Option<Triple>,
}

/// Whether every triple of `positive` is accepted and every triple of
/// `negative` rejected.
pub fn separates(
    embedding: &BTreeMap<String, Vec<Q>>,
    relations: &BTreeMap<String, Relation>,
    positive: &BTreeSet<Triple>,
    negative: &BTreeSet<Triple>,
) -> Result<Separation, LimitsError> {
    let lookup = |t: &Triple| -> Result<bool, LimitsError> {
        let e = embedding.get(&t.0).ok_or_else(|| LimitsError::UnknownEntity(t.0.clone()))?;
        let rel = relations.get(&t.1).ok_or_else(|| LimitsError::UnknownRelation(t.1.clone()))?;
        let f = embedding.get(&t.2).ok_or_else(|| LimitsError::UnknownEntity(t.2.clone()))?;
        in_region(rel, e, f)
    };
    for (set, want) in [(positive, true), (negative, false)] {
        for t in set {
            if lookup(t)? != want {
                return Ok(Separation { separates: false, failing: Some(t.clone()) });
            }
        }
    }
    Ok(Separation { separates: true, failing: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, to_f64};
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(&Scorer::TransE { r: v(&[1]) }, &v(&[0]), &v(&[1])).unwrap(), q(0));
        assert_eq!(score(&Scorer::DistMult { r: v(&[1, 1]) }, &v(&[1, 2]), &v(&[1, 1])).unwrap(), q(-3));
        let id = vec![v(&[1, 0]), v(&[0, 1])];
        assert_eq!(score(&Scorer::Rescal { m: id.clone() }, &v(&[1, 0]), &v(&[1, 0])).unwrap(), q(-1));
        let st = Scorer::STransE { r: v(&[1, 0]), mh: id.clone(), mt: vec![v(&[2, 0]), v(&[0, 2])] };
        assert_eq!(score(&st, &v(&[1, 1]), &v(&[1, 1])).unwrap(), q(1));
        assert_eq!(
            score(&Scorer::DistMult { r: v(&[1]) }, &v(&[1, 2]), &v(&[1])),
            Err(LimitsError::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn region_examples() {
        let t = Relation { scorer: Scorer::TransE { r: v(&[3, -1]) }, lambda: q(0) };
        assert!(in_region(&t, &v(&[1, 1]), &v(&[4, 0])).unwrap());
        let zero = Relation { scorer: Scorer::Rescal { m: vec![v(&[0, 0]), v(&[0, 0])] }, lambda: q(-1) };
        assert!(!in_region(&zero, &v(&[5, -2]), &v(&[1, 7])).unwrap());
    }

    #[test]
    fn separation_examples() {
        let emb: BTreeMap<String, Vec<Q>> = [("e".into(), v(&[0])), ("f".into(), v(&[1]))].into();
        let trans: BTreeMap<String, Relation> =
            [("R".into(), Relation { scorer: Scorer::TransE { r: v(&[1]) }, lambda: q(0) })].into();
        let pos: BTreeSet<Triple> = [("e".into(), "R".into(), "f".into())].into();
        let neg: BTreeSet<Triple> = [("f".into(), "R".into(), "e".into())].into();
        assert!(separates(&emb, &trans, &BTreeSet::new(), &BTreeSet::new()).unwrap().separates);
        assert!(separates(&emb, &trans, &pos, &neg).unwrap().separates);
        assert_eq!(score(&trans["R"].scorer, &v(&[1]), &v(&[0])).unwrap(), q(2));
        let dm: BTreeMap<String, Relation> =
            [("R".into(), Relation { scorer: Scorer::DistMult { r: v(&[3]) }, lambda: q(-1) })].into();
        let sep = separates(&emb, &dm, &pos, &neg).unwrap();
        assert!(!sep.separates);
        let missing: BTreeSet<Triple> = [("x".into(), "R".into(), "e".into())].into();
        assert_eq!(separates(&emb, &dm, &missing, &neg), Err(LimitsError::UnknownEntity("x".into())));
    }

    fn small() -> impl Strategy<Value = Q> {
        (-20i64..=20, 1i64..=4).prop_map(|(n, d)| frac(n, d))
    }

    proptest! {
        #[test]
        fn distmult_is_symmetric(r in prop::collection::vec(small(), 3), e in prop::collection::vec(small(), 3),
                                 f in prop::collection::vec(small(), 3), lambda in small()) {
            let rel = Relation { scorer: Scorer::DistMult { r }, lambda };
            prop_assert_eq!(in_region(&rel, &e, &f).unwrap(), in_region(&rel, &f, &e).unwrap());
        }

        #[test]
        fn complex_and_distmult_are_bilinear(re in prop::collection::vec(small(), 2), im in prop::collection::vec(small(), 2),
                                              e in prop::collection::vec(small(), 4), f in prop::collection::vec(small(), 4)) {
            let c = Scorer::ComplEx { re: re.clone(), im };
            let m = c.as_bilinear().unwrap();
            prop_assert_eq!(score(&c, &e, &f).unwrap(), score(&Scorer::Rescal { m }, &e, &f).unwrap());
            let d = Scorer::DistMult { r: re };
            let md = d.as_bilinear().unwrap();
            prop_assert_eq!(score(&d, &e[..2], &f[..2]).unwrap(), score(&Scorer::Rescal { m: md }, &e[..2], &f[..2]).unwrap());
        }

        #[test]
        fn complex_matches_complex_arithmetic(re in prop::collection::vec(small(), 2), im in prop::collection::vec(small(), 2),
                                               e in prop::collection::vec(small(), 4), f in prop::collection::vec(small(), 4)) {
            // -Re(Σ e_i r_i conj(f_i)) with f64 complex arithmetic
            let mut acc = 0.0;
            for i in 0..2 {
                let (a, b) = (to_f64(&e[i]), to_f64(&e[2 + i]));
                let (c, d) = (to_f64(&re[i]), to_f64(&im[i]));
                let (x, y) = (to_f64(&f[i]), -to_f64(&f[2 + i]));
                let (pr, pi) = (a * c - b * d, a * d + b * c);
                acc += pr * x - pi * y;
            }
            let s = to_f64(&score(&Scorer::ComplEx { re, im }, &e, &f).unwrap());
            prop_assert!((s + acc).abs() < 1e-9);
        }
    }
}
