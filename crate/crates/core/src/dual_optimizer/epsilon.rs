use crate::tabular_engine::Matrix;

use super::config::{DualConfig, OptimError};
use super::grad::{chain_softmax, constraint_value, grad_constraint, softmax_rows};
use super::lagvae::init_state;

/// Result of the constraint-only budget selection.
#[derive(Debug, Clone)]
pub struct EpsilonSelection {
    /// Divergences achieved by the constraint-only optimization, ε̂.
    pub hat: Vec<f64>,
    /// Final budgets ε = ε̂ + γ_abs + γ_rel ⊙ ε̂, floored at
    /// [`EPSILON_FLOOR`].
    pub epsilons: Vec<f64>,
}

/// Budgets must stay strictly positive. The selection run can achieve an
/// exact-zero divergence on desk-scale instances, in which case any
/// positive budget is feasible (the optimized point witnesses it).
pub const EPSILON_FLOOR: f64 = 1e-9;

/// Selects constraint budgets by first optimizing the constraints alone
/// (fixed multipliers, information preference ignored), reading off the
/// achieved divergences, and adding the configured slack. The optimized
/// point witnesses feasibility; any positive slack makes it strict.
pub fn select_epsilon(cfg: &DualConfig) -> Result<EpsilonSelection, OptimError> {
    cfg.validate()?;
    let iters = cfg.select_iters.unwrap_or(cfg.iters);
    let lambdas: Vec<f64> = cfg
        .constraints
        .iter()
        .map(|c| c.kind.selection_lambda())
        .collect();
    let mut state = init_state(cfg);
    for _ in 0..iters {
        let m = state.model(cfg);
        for c in &cfg.constraints {
            let v = constraint_value(&m, c.kind, cfg.kernel_sigma);
            if !v.is_finite() {
                return Err(OptimError::Selection(format!(
                    "constraint {} diverged during budget selection",
                    c.kind.name()
                )));
            }
        }
        let theta_q = softmax_rows(&state.logits_q);
        let theta_p = softmax_rows(&state.logits_p);
        let mut acc_q = Matrix::zeros(cfg.nx(), cfg.nz());
        let mut acc_p = Matrix::zeros(cfg.nz(), cfg.nx());
        for (k, spec) in cfg.constraints.iter().enumerate() {
            let g = grad_constraint(&m, spec.kind, cfg.kernel_sigma);
            for (a, b) in acc_q.data.iter_mut().zip(&g.d_theta_q.data) {
                *a += lambdas[k] * b;
            }
            for (a, b) in acc_p.data.iter_mut().zip(&g.d_theta_p.data) {
                *a += lambdas[k] * b;
            }
        }
        let gq = chain_softmax(&theta_q, &acc_q);
        let gp = chain_softmax(&theta_p, &acc_p);
        for (l, g) in state.logits_q.data.iter_mut().zip(&gq.data) {
            *l -= cfg.rho_theta * g;
        }
        for (l, g) in state.logits_p.data.iter_mut().zip(&gp.data) {
            *l -= cfg.rho_theta * g;
        }
    }
    let m = state.model(cfg);
    let hat: Vec<f64> = cfg
        .constraints
        .iter()
        .map(|c| constraint_value(&m, c.kind, cfg.kernel_sigma))
        .collect();
    let k = cfg.constraints.len();
    let zero = vec![0.0; k];
    let g_abs = cfg.gamma_abs.as_deref().unwrap_or(&zero);
    let g_rel = cfg.gamma_rel.as_deref().unwrap_or(&zero);
    let epsilons = hat
        .iter()
        .zip(g_abs.iter().zip(g_rel))
        .map(|(h, (a, r))| (h + a + r * h).max(EPSILON_FLOOR))
        .collect();
    Ok(EpsilonSelection { hat, epsilons })
}
