//! Exact rational linear algebra over the 20-dimensional expectation basis.
//!
//! Everything in this module is arbitrary-precision rational arithmetic;
//! no floating point enters.  Rank is computed by fraction-free
//! (Bareiss-style) elimination over integers, solution extraction by
//! reduced row echelon form with leftmost-pivot tie-breaking so that
//! membership certificates are deterministic.

mod matrix;
mod rational;
mod term_vector;

pub use matrix::{AlgebraError, RationalMatrix};
pub use rational::{format_rational, parse_rational, rat, rat_int, to_f64, Rational};
pub use term_vector::{TermVector, BASIS_DIM};
