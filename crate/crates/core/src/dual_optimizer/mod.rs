//! Dual optimization of constrained information objectives on tabular
//! models: the ascent loop, budget selection, the fixed-multiplier
//! baseline, the assembled explicit objectives, a brute-force primal
//! oracle, and the sweep/Pareto harness.

mod config;
mod epsilon;
mod explicit;
mod grad;
mod lagvae;
mod oracle;
mod sweep;

pub use config::{ConstraintKind, ConstraintSpec, DualConfig, OptimError};
pub use epsilon::{select_epsilon, EpsilonSelection, EPSILON_FLOOR};
pub use explicit::{explicit_objective, ExplicitObjective};
pub use grad::{
    bound_objective, constraint_value, gradients, DualState, GradientSet, ThetaGrad,
};
pub use lagvae::{init_state, run_infovae_baseline, run_lagvae, DualTrace, TraceRow};
pub use oracle::{primal_oracle, OracleResult};
pub use sweep::{
    run_sweep, Domination, InfoVaePoint, LagVaePoint, SweepConfig, SweepOutcome, SweepRow,
};
