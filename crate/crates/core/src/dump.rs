//! JSON documents for models and geometric interpretations. Rationals are
//! written as `"p/q"` (or `"p"` for integers) so that dumps round-trip
//! exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chase::Interpretation;
use crate::geometry::{GeometricInterpretation, GeometryError, Point, Polytope};
use crate::syntax::{Atom, Term};

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0:?} is not an object name")]
    BadObject(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Serde adapter for a single rational as a string.
pub mod q_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Serde adapter for a vector of rationals as strings.
pub mod q_vec {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&fmt_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_q(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))).collect()
    }
}

/// Serde adapter for a matrix of rationals as rows of strings.
pub mod q_mat {
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.len()))?;
        for row in m {
            seq.serialize_element(&row.iter().map(fmt_q).collect::<Vec<_>>())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|r| {
                r.iter().map(|s| parse_q(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))).collect()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    rel: String,
    args: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    atoms: Vec<AtomDoc>,
}

#[derive(Serialize, Deserialize)]
struct RegionDoc {
    arity: usize,
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct GeometricDoc {
    m: usize,
    entities: BTreeMap<String, Point>,
    relations: BTreeMap<String, RegionDoc>,
}

fn object(s: &str) -> Result<Term, DumpError> {
    Term::parse_object(s).ok_or_else(|| DumpError::BadObject(s.to_string()))
}

pub fn model_to_json(m: &Interpretation) -> String {
    let doc = ModelDoc {
        atoms: m
            .iter()
            .map(|a| AtomDoc { rel: a.relation.clone(), args: a.args.iter().map(Term::to_string).collect() })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn model_from_json(text: &str) -> Result<Interpretation, DumpError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    let atoms = doc
        .atoms
        .into_iter()
        .map(|a| Ok(Atom::new(a.rel, a.args.iter().map(|s| object(s)).collect::<Result<_, _>>()?)))
        .collect::<Result<_, DumpError>>()?;
    Ok(Interpretation::new(atoms))
}

pub fn geometric_to_json(eta: &GeometricInterpretation) -> String {
    let doc = GeometricDoc {
        m: eta.m(),
        entities: eta.entities().iter().map(|(o, p)| (o.to_string(), p.clone())).collect(),
        relations: eta
            .regions()
            .iter()
            .map(|(r, poly)| (r.clone(), RegionDoc { arity: eta.arities()[r], vertices: poly.vertices().to_vec() }))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn geometric_from_json(text: &str) -> Result<GeometricInterpretation, DumpError> {
    let doc: GeometricDoc = serde_json::from_str(text)?;
    let mut eta = GeometricInterpretation::new(doc.m);
    for (o, p) in doc.entities {
        eta.add_entity(object(&o)?, p)?;
    }
    for (r, region) in doc.relations {
        let poly = Polytope::new(region.arity * doc.m, region.vertices)?;
        eta.set_region(&r, region.arity, poly)?;
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn model_round_trip() {
        let m: Interpretation =
            [Atom::new("Married", vec![Term::Null(1), Term::constant("anna")]), Atom::fact("Wife", &["anna"])]
                .into_iter()
                .collect();
        let text = model_to_json(&m);
        assert!(text.contains("\"_n1\""));
        let back = model_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_json(&back), text);
    }

    #[test]
    fn geometric_round_trip() {
        let mut eta = GeometricInterpretation::new(2);
        eta.add_entity(Term::constant("a"), Point::new(vec![frac(1, 3), frac(-2, 1)])).unwrap();
        eta.set_region(
            "R",
            1,
            Polytope::new(2, vec![Point::from_ints(&[0, 0]), Point::new(vec![frac(5, 7), frac(1, 1)])]).unwrap(),
        )
        .unwrap();
        let text = geometric_to_json(&eta);
        assert!(text.contains("\"1/3\"") && text.contains("\"-2\""));
        let back = geometric_from_json(&text).unwrap();
        assert_eq!(back, eta);
        assert_eq!(geometric_to_json(&back), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            model_from_json("{\"atoms\":[{\"rel\":\"R\",\"args\":[\"X\"]}]}"),
            Err(DumpError::BadObject(_))
        ));
        assert!(matches!(
            geometric_from_json("{\"m\":1,\"entities\":{\"a\":[\"1/0\"]},\"relations\":{}}"),
            Err(DumpError::Json(_))
        ));
        assert!(matches!(
            geometric_from_json("{\"m\":1,\"entities\":{\"a\":[\"1\",\"2\"]},\"relations\":{}}"),
            Err(DumpError::Geometry(_))
        ));
    }
}
