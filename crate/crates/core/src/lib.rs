//! Symbolic computation of regular normal cones (and tangent cones, polar
//! sets, regular co-derivatives) of semialgebraic sets by quantifier
//! elimination over the reals, built on an exact cylindrical algebraic
//! decomposition kernel.

pub mod cad;
pub mod cone;
pub mod formula;
pub mod poly;
pub mod qe;

pub use formula::{Formula, QuantKind, Rel, SemialgebraicSet};
pub use poly::{AlgebraicNumber, Poly, Rat, SamplePoint, Var};
