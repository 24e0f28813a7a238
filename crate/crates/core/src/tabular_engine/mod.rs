//! Exact evaluation of objectives on finite discrete models.
//!
//! A model fixes the data marginal `q(x)`, the prior `p(z)` and the two
//! conditional parameter matrices; everything else (joints, marginals,
//! conditionals, the twenty basis expectations, the twelve KL expressions,
//! mutual informations, their bounds, MMD and the ELBO) is computed by
//! direct double summation in f64.  Support violations surface as
//! infinity sentinels, never NaN, so the optimizer's line search stays
//! honest.

mod bounds;
mod eval;
mod kernel;
mod model;

pub use bounds::{mi_bounds, MiBounds};
pub use eval::{
    elbo, eval_kl_expression, eval_objective, eval_term, mutual_information, AtomEvaluator,
    EvalError, EvalOptions,
};
pub use kernel::{mmd_marginal, mmd_z, KernelError, KernelSpec};
pub use model::{feasible_model, Matrix, ModelDistributions, ModelError, TabularModel};
