//! Region-based semantics for existential-rule knowledge bases.
//!
//! Relations are interpreted as convex regions over concatenated entity
//! vectors. The crate covers the whole pipeline:
//!
//! * [`syntax`]: rule text format, abstract syntax, quasi-chainedness,
//!   weak acyclicity and single-head normalization.
//! * [`chase`]: restricted chase, brute-force model checking and a naive
//!   datalog fixpoint used as an oracle.
//! * [`geometry`]: exact rational polytopes, LP membership, double
//!   description, the one-hot convex model construction and its extensions.
//! * [`rule_check`]: exact rule satisfaction for convex interpretations,
//!   randomized extension probing and the Helly dimension counterexample.
//! * [`limits`]: scoring functions of common embedding models and the
//!   constructive arguments showing what they cannot represent.
//! * [`dump`]: JSON documents for models and geometric interpretations.

pub mod chase;
pub mod dump;
pub mod gen;
pub mod geometry;
pub mod limits;
pub mod rational;
pub mod rule_check;
pub mod syntax;

pub use chase::{chase, datalog_fixpoint, is_model, ChaseResult, Interpretation};
pub use geometry::{GeometricInterpretation, Point, Polytope};
pub use rational::Q;
pub use syntax::{parse_program, Atom, ExistentialRule, KnowledgeBase, NegativeConstraint, Ontology, Term};
