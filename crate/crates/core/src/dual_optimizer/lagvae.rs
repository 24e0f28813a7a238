use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tabular_engine::{elbo, mi_bounds, Matrix, TabularModel};

use super::config::{DualConfig, OptimError};
use super::grad::{
    bound_objective, chain_softmax, constraint_value, grad_bound_objective, grad_constraint,
    softmax_rows, DualState,
};

/// One recorded iteration of the dual loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub lambdas: Vec<f64>,
    pub constraints: Vec<f64>,
    /// Bound objective value at this iterate.
    pub f: f64,
    pub i_q: f64,
    pub i_q_upper: f64,
    pub i_q_lower: f64,
    pub elbo: f64,
}

/// Full record of a run: `iters + 1` rows (the initial state included),
/// the final model, and the budgets the run used.
#[derive(Debug, Clone)]
pub struct DualTrace {
    pub rows: Vec<TraceRow>,
    pub final_model: TabularModel,
    pub epsilons: Vec<f64>,
}

impl DualTrace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the initial row")
    }

    /// Running best feasible objective value (minimization); +∞ until the
    /// first feasible iterate.
    pub fn best_feasible_f(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.rows
            .iter()
            .map(|r| {
                let feasible = r
                    .constraints
                    .iter()
                    .zip(&self.epsilons)
                    .all(|(d, e)| d <= e);
                if feasible {
                    best = best.min(r.f);
                }
                best
            })
            .collect()
    }

    /// CSV serialization: `iter,lambda_1..k,d_1..k,f,i_q,i_q_upper,
    /// i_q_lower,elbo`, one row per iteration.
    pub fn to_csv(&self) -> String {
        let k = self.epsilons.len();
        let mut out = String::from("iter");
        for i in 1..=k {
            out.push_str(&format!(",lambda_{i}"));
        }
        for i in 1..=k {
            out.push_str(&format!(",d_{i}"));
        }
        out.push_str(",f,i_q,i_q_upper,i_q_lower,elbo\n");
        for r in &self.rows {
            out.push_str(&r.iter.to_string());
            for v in r.lambdas.iter().chain(&r.constraints) {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            for v in [r.f, r.i_q, r.i_q_upper, r.i_q_lower, r.elbo] {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Deterministic random initialization of the logits.
pub fn init_state(cfg: &DualConfig) -> DualState {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut logits_q = Matrix::zeros(cfg.nx(), cfg.nz());
    let mut logits_p = Matrix::zeros(cfg.nz(), cfg.nx());
    for v in &mut logits_q.data {
        *v = rng.gen_range(-0.5..0.5);
    }
    for v in &mut logits_p.data {
        *v = rng.gen_range(-0.5..0.5);
    }
    DualState {
        logits_q,
        logits_p,
        lambdas: vec![1.0; cfg.constraints.len()],
    }
}

fn record(state: &DualState, cfg: &DualConfig, iter: usize) -> TraceRow {
    let m = state.model(cfg);
    let b = mi_bounds(&m);
    TraceRow {
        iter,
        lambdas: state.lambdas.clone(),
        constraints: cfg
            .constraints
            .iter()
            .map(|c| constraint_value(&m, c.kind, cfg.kernel_sigma))
            .collect(),
        f: bound_objective(&m, cfg.alpha1, cfg.alpha2),
        i_q: b.i_q,
        i_q_upper: b.i_q_upper,
        i_q_lower: b.i_q_lower,
        elbo: elbo(&m),
    }
}

const DIVERGENCE_PATIENCE: usize = 10;
// caps the multiplier ascent signal when a constraint is (still) infinite
const LAMBDA_STEP_CAP: f64 = 1e6;

enum Multipliers {
    Ascended,
    Frozen(Vec<f64>),
}

fn run_loop(
    cfg: &DualConfig,
    epsilons: &[f64],
    iters: usize,
    multipliers: Multipliers,
) -> Result<DualTrace, OptimError> {
    let mut state = init_state(cfg);
    if let Multipliers::Frozen(l) = &multipliers {
        state.lambdas = l.clone();
    }
    let mut rows = Vec::with_capacity(iters + 1);
    let mut infinite_streak = 0usize;
    for t in 0..iters {
        let row = record(&state, cfg, t);
        let any_infinite = row.constraints.iter().any(|d| !d.is_finite());
        rows.push(row);
        if any_infinite {
            infinite_streak += 1;
            if infinite_streak >= DIVERGENCE_PATIENCE {
                return Err(OptimError::Diverged {
                    streak: infinite_streak,
                    rows: rows.len(),
                });
            }
        } else {
            infinite_streak = 0;
        }

        // θ descent: ∇f + Σ λ_k (scaled) ∇D_k, through the softmax
        let m = state.model(cfg);
        let theta_q = softmax_rows(&state.logits_q);
        let theta_p = softmax_rows(&state.logits_p);
        let mut g_theta = grad_bound_objective(&m, cfg.alpha1, cfg.alpha2);
        for (k, spec) in cfg.constraints.iter().enumerate() {
            let w = if cfg.eps_scaled {
                state.lambdas[k] / epsilons[k]
            } else {
                state.lambdas[k]
            };
            if w != 0.0 {
                let gc = grad_constraint(&m, spec.kind, cfg.kernel_sigma);
                add_scaled_q(&mut g_theta.d_theta_q, &gc.d_theta_q, w);
                add_scaled_q(&mut g_theta.d_theta_p, &gc.d_theta_p, w);
            }
        }
        let gq = chain_softmax(&theta_q, &g_theta.d_theta_q);
        let gp = chain_softmax(&theta_p, &g_theta.d_theta_p);
        for (l, g) in state.logits_q.data.iter_mut().zip(&gq.data) {
            *l -= cfg.rho_theta * g;
        }
        for (l, g) in state.logits_p.data.iter_mut().zip(&gp.data) {
            *l -= cfg.rho_theta * g;
        }

        // λ ascent with projection onto λ ≥ 0
        if matches!(multipliers, Multipliers::Ascended) {
            let d_now = &rows.last().expect("just pushed").constraints;
            for (k, lam) in state.lambdas.iter_mut().enumerate() {
                let gap = if cfg.eps_scaled {
                    d_now[k] / epsilons[k] - 1.0
                } else {
                    d_now[k] - epsilons[k]
                };
                let gap = gap.clamp(-LAMBDA_STEP_CAP, LAMBDA_STEP_CAP);
                *lam = (*lam + cfg.rho_lambda * gap).max(0.0);
            }
        }
    }
    rows.push(record(&state, cfg, iters));
    Ok(DualTrace {
        rows,
        final_model: state.model(cfg),
        epsilons: epsilons.to_vec(),
    })
}

fn add_scaled_q(dst: &mut Matrix, src: &Matrix, s: f64) {
    for (a, b) in dst.data.iter_mut().zip(&src.data) {
        *a += s * b;
    }
}

fn resolved_epsilons(cfg: &DualConfig) -> Result<Vec<f64>, OptimError> {
    cfg.constraints
        .iter()
        .map(|c| {
            c.epsilon.ok_or_else(|| {
                OptimError::Config(format!(
                    "constraint {} has no epsilon; run budget selection first",
                    c.kind.name()
                ))
            })
        })
        .collect()
}

/// Dual optimization: gradient descent on θ, projected ascent on λ.
/// Deterministic given the seed; the trace has `iters + 1` rows.
pub fn run_lagvae(cfg: &DualConfig) -> Result<DualTrace, OptimError> {
    cfg.validate()?;
    let eps = resolved_epsilons(cfg)?;
    run_loop(cfg, &eps, cfg.iters, Multipliers::Ascended)
}

/// The fixed-multiplier baseline: the same loop with λ frozen at
/// `baseline_lambdas`, field-for-field comparable with [`run_lagvae`].
pub fn run_infovae_baseline(cfg: &DualConfig) -> Result<DualTrace, OptimError> {
    cfg.validate()?;
    let lambdas = cfg
        .baseline_lambdas
        .clone()
        .ok_or_else(|| OptimError::Config("baseline_lambdas must be set".into()))?;
    // frozen multipliers need no budgets; default them so the trace still
    // carries a feasibility reference when the config has none
    let eps: Vec<f64> = cfg
        .constraints
        .iter()
        .map(|c| c.epsilon.unwrap_or(f64::INFINITY))
        .collect();
    run_loop(cfg, &eps, cfg.iters, Multipliers::Frozen(lambdas))
}
