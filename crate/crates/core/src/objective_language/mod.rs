//! Grammar, parser and exact encoder for Lagrangian objectives.
//!
//! Objectives are linear combinations of the two mutual informations, the
//! ten ordered KL divergences, directly written expectation terms, and
//! opaque divergence atoms (JS/MMD/W/f).  The encoder maps everything
//! except the atoms onto the 20-term basis with exact rational
//! coefficients.

mod ast;
mod basis;
mod builtins;
mod encode;
mod parser;

pub use ast::{
    AtomKind, DivergenceAtom, KlExpression, KlLagrangianCoeffs, LagrangianObjective,
    KL_EXPRESSION_COUNT,
};
pub use basis::{BasisTerm, DistRef, Family, Signature};
pub use builtins::{builtin_matrix, BuiltinMatrix};
pub use encode::encode_kl;
pub use parser::{parse_objective, parse_objective_json, ParseError};
