//! Computability classification and exact rewriting of objectives.
//!
//! An objective's KL part is classified by exact subspace membership
//! against the frozen term matrices (likelihood-based ⊂ unary ⊂ binary);
//! opaque atoms are classified by shape only, since no elementary
//! transformation can rewrite a non-KL divergence.  [`verify_closure`]
//! recomputes the six subspace dimensions behind the closure theorems.

mod catalog;
mod classify;
mod closure;

pub use catalog::{catalog, CatalogEntry, CatalogObjective};
pub use classify::{
    classify, compile, equivalent, CompileError, TractabilityClass, TractableDecomposition,
    TractableTerm,
};
pub use closure::{verify_closure, verify_closure_with, ClosureMatrices, ClosureReport};
