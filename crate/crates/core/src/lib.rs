//! Exact algebra and desk-scale optimization for latent-variable
//! generative-model objectives.
//!
//! The crate has two halves.  The exact half ([`term_algebra`],
//! [`objective_language`], [`tractability_compiler`]) treats training
//! objectives as rational vectors over a fixed 20-term expectation basis,
//! classifies them into computability classes and certifies rewritings
//! into tractable forms.  The numeric half ([`tabular_engine`],
//! [`dual_optimizer`]) evaluates every quantity exactly on finite discrete
//! models and runs the dual ascent loop, the constraint-budget selection
//! procedure and a brute-force primal oracle against it.

pub mod dual_optimizer;
pub mod objective_language;
pub mod tabular_engine;
pub mod term_algebra;
pub mod tractability_compiler;
