//! Analytic gradients of the bound objectives and constraints, in both
//! probability space (for the projected oracle) and logits space (for the
//! dual loop, via the row-softmax chain rule).

use crate::tabular_engine::{elbo, mi_bounds, mmd_z, KernelSpec, Matrix, TabularModel};

use super::config::{ConstraintKind, DualConfig, OptimError};

/// Gradient pair with respect to the two parameter matrices.
#[derive(Debug, Clone)]
pub struct ThetaGrad {
    /// nx×nz, ∂/∂θ^q.
    pub d_theta_q: Matrix,
    /// nz×nx, ∂/∂θ^p.
    pub d_theta_p: Matrix,
}

impl ThetaGrad {
    fn zeros(nx: usize, nz: usize) -> Self {
        Self {
            d_theta_q: Matrix::zeros(nx, nz),
            d_theta_p: Matrix::zeros(nz, nx),
        }
    }

    fn add_scaled(&mut self, other: &ThetaGrad, s: f64) {
        for (a, b) in self.d_theta_q.data.iter_mut().zip(&other.d_theta_q.data) {
            *a += s * b;
        }
        for (a, b) in self.d_theta_p.data.iter_mut().zip(&other.d_theta_p.data) {
            *a += s * b;
        }
    }
}

// logs of softmax outputs never hit zero, but the fixed marginals can;
// ratios against them are clamped so a pathological config produces large
// finite pushes instead of NaN
const TINY: f64 = 1e-300;

fn ln_ratio(a: f64, b: f64) -> f64 {
    (a.max(TINY) / b.max(TINY)).ln()
}

/// ∂Ī_q/∂θ (the rate term `E_{q(x)}[KL(q(z|x)‖p(z))]`).
pub fn grad_upper_q(m: &TabularModel) -> ThetaGrad {
    let mut g = ThetaGrad::zeros(m.nx(), m.nz());
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            let v = m.q_x[i] * (ln_ratio(m.theta_q.get(i, j), m.p_z[j]) + 1.0);
            g.d_theta_q.set(i, j, v);
        }
    }
    g
}

/// ∂I̲_q/∂θ (reconstruction `E_q[log p(x|z)]`; the entropy constant drops).
pub fn grad_lower_q(m: &TabularModel) -> ThetaGrad {
    let mut g = ThetaGrad::zeros(m.nx(), m.nz());
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            g.d_theta_q
                .set(i, j, m.q_x[i] * m.theta_p.get(j, i).max(TINY).ln());
            let v = m.q_x[i] * m.theta_q.get(i, j) / m.theta_p.get(j, i).max(TINY);
            g.d_theta_p.set(j, i, v);
        }
    }
    g
}

/// ∂Ī_p/∂θ.
pub fn grad_upper_p(m: &TabularModel) -> ThetaGrad {
    let mut g = ThetaGrad::zeros(m.nx(), m.nz());
    for j in 0..m.nz() {
        for i in 0..m.nx() {
            let v = m.p_z[j] * (ln_ratio(m.theta_p.get(j, i), m.q_x[i]) + 1.0);
            g.d_theta_p.set(j, i, v);
        }
    }
    g
}

/// ∂I̲_p/∂θ.
pub fn grad_lower_p(m: &TabularModel) -> ThetaGrad {
    let mut g = ThetaGrad::zeros(m.nx(), m.nz());
    for j in 0..m.nz() {
        for i in 0..m.nx() {
            g.d_theta_p
                .set(j, i, m.p_z[j] * m.theta_q.get(i, j).max(TINY).ln());
            let v = m.p_z[j] * m.theta_p.get(j, i) / m.theta_q.get(i, j).max(TINY);
            g.d_theta_q.set(i, j, v);
        }
    }
    g
}

/// ∂D/∂θ for one constraint.
pub fn grad_constraint(m: &TabularModel, kind: ConstraintKind, sigma: f64) -> ThetaGrad {
    match kind {
        // −ELBO and the joint KL differ by the constant H_q(x)
        ConstraintKind::NegElbo | ConstraintKind::KlJointQp => {
            let mut g = grad_upper_q(m);
            g.add_scaled(&grad_lower_q(m), -1.0);
            g
        }
        ConstraintKind::KlZQp => {
            let q_z = m.distributions().q_z;
            let mut g = ThetaGrad::zeros(m.nx(), m.nz());
            for i in 0..m.nx() {
                for j in 0..m.nz() {
                    g.d_theta_q
                        .set(i, j, m.q_x[i] * (ln_ratio(q_z[j], m.p_z[j]) + 1.0));
                }
            }
            g
        }
        ConstraintKind::KlZPq => {
            let q_z = m.distributions().q_z;
            let mut g = ThetaGrad::zeros(m.nx(), m.nz());
            for i in 0..m.nx() {
                for j in 0..m.nz() {
                    g.d_theta_q
                        .set(i, j, -m.q_x[i] * m.p_z[j] / q_z[j].max(TINY));
                }
            }
            g
        }
        ConstraintKind::MmdZ => {
            let q_z = m.distributions().q_z;
            let nz = m.nz();
            let k = |a: usize, b: usize| -> f64 {
                let d = a as f64 - b as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            };
            let kd: Vec<f64> = (0..nz)
                .map(|a| (0..nz).map(|b| k(a, b) * (q_z[b] - m.p_z[b])).sum())
                .collect();
            let mut g = ThetaGrad::zeros(m.nx(), nz);
            for i in 0..m.nx() {
                for j in 0..nz {
                    g.d_theta_q.set(i, j, 2.0 * m.q_x[i] * kd[j]);
                }
            }
            g
        }
    }
}

/// Value of one constraint on a model.
pub fn constraint_value(m: &TabularModel, kind: ConstraintKind, sigma: f64) -> f64 {
    use crate::objective_language::{Family, KlExpression, Signature};
    use crate::tabular_engine::eval_kl_expression;
    let d = m.distributions();
    match kind {
        ConstraintKind::NegElbo => -elbo(m),
        ConstraintKind::KlJointQp => {
            eval_kl_expression(m, &d, KlExpression::kl(Family::Q, Signature::Joint))
        }
        ConstraintKind::KlZQp => {
            eval_kl_expression(m, &d, KlExpression::kl(Family::Q, Signature::MargZ))
        }
        ConstraintKind::KlZPq => {
            eval_kl_expression(m, &d, KlExpression::kl(Family::P, Signature::MargZ))
        }
        ConstraintKind::MmdZ => {
            mmd_z(m, &KernelSpec::Gaussian { sigma }).expect("gaussian kernel is psd")
        }
    }
}

/// The bound objective selected by the preference signs:
/// `α₁·(Ī_q or I̲_q) + α₂·(Ī_p or I̲_p)`.
pub fn bound_objective(m: &TabularModel, alpha1: f64, alpha2: f64) -> f64 {
    let b = mi_bounds(m);
    let q_part = if alpha1 >= 0.0 { b.i_q_upper } else { b.i_q_lower };
    let p_part = if alpha2 >= 0.0 { b.i_p_upper } else { b.i_p_lower };
    alpha1 * q_part + alpha2 * p_part
}

/// ∂/∂θ of [`bound_objective`].
pub fn grad_bound_objective(m: &TabularModel, alpha1: f64, alpha2: f64) -> ThetaGrad {
    let mut g = ThetaGrad::zeros(m.nx(), m.nz());
    if alpha1 != 0.0 {
        let gq = if alpha1 >= 0.0 {
            grad_upper_q(m)
        } else {
            grad_lower_q(m)
        };
        g.add_scaled(&gq, alpha1);
    }
    if alpha2 != 0.0 {
        let gp = if alpha2 >= 0.0 {
            grad_upper_p(m)
        } else {
            grad_lower_p(m)
        };
        g.add_scaled(&gp, alpha2);
    }
    g
}

/// Unconstrained parameterization: row-softmax of logits.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(logits.rows, logits.cols);
    for r in 0..logits.rows {
        let row = logits.row(r);
        let mx = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let exps: Vec<f64> = row.iter().map(|&x| (x - mx).exp()).collect();
        let s: f64 = exps.iter().sum();
        for (c, e) in exps.iter().enumerate() {
            out.set(r, c, e / s);
        }
    }
    out
}

/// Chain rule through the row softmax: for each row,
/// `∂F/∂l_j = θ_j (g_j − Σ_k θ_k g_k)`.
pub fn chain_softmax(theta: &Matrix, d_theta: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(theta.rows, theta.cols);
    for r in 0..theta.rows {
        let dot: f64 = (0..theta.cols)
            .map(|c| theta.get(r, c) * d_theta.get(r, c))
            .sum();
        for c in 0..theta.cols {
            out.set(r, c, theta.get(r, c) * (d_theta.get(r, c) - dot));
        }
    }
    out
}

/// Dual-loop state: unconstrained logits plus the multipliers.
#[derive(Debug, Clone)]
pub struct DualState {
    /// nx×nz logits for q(z|x).
    pub logits_q: Matrix,
    /// nz×nx logits for p(x|z).
    pub logits_p: Matrix,
    pub lambdas: Vec<f64>,
}

impl DualState {
    pub fn model(&self, cfg: &DualConfig) -> TabularModel {
        TabularModel::new(
            cfg.q_x.clone(),
            cfg.p_z.clone(),
            softmax_rows(&self.logits_q),
            softmax_rows(&self.logits_p),
        )
        .expect("softmax rows are stochastic")
    }
}

/// Gradients of the objective and all constraints with respect to the
/// logits.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub f_logits_q: Matrix,
    pub f_logits_p: Matrix,
    /// One (∂D/∂logits_q, ∂D/∂logits_p) pair per constraint, in config
    /// order.
    pub constraints: Vec<(Matrix, Matrix)>,
}

/// Analytic logits-space gradients of the bound objective and every
/// constraint at the given state. Errors when a constraint is already
/// infinite (the descent direction is undefined there).
pub fn gradients(state: &DualState, cfg: &DualConfig) -> Result<GradientSet, OptimError> {
    let m = state.model(cfg);
    let theta_q = softmax_rows(&state.logits_q);
    let theta_p = softmax_rows(&state.logits_p);
    for c in &cfg.constraints {
        let v = constraint_value(&m, c.kind, cfg.kernel_sigma);
        if !v.is_finite() {
            return Err(OptimError::InfiniteConstraint {
                name: c.kind.name().into(),
            });
        }
    }
    let gf = grad_bound_objective(&m, cfg.alpha1, cfg.alpha2);
    let constraints = cfg
        .constraints
        .iter()
        .map(|c| {
            let g = grad_constraint(&m, c.kind, cfg.kernel_sigma);
            (
                chain_softmax(&theta_q, &g.d_theta_q),
                chain_softmax(&theta_p, &g.d_theta_p),
            )
        })
        .collect();
    Ok(GradientSet {
        f_logits_q: chain_softmax(&theta_q, &gf.d_theta_q),
        f_logits_p: chain_softmax(&theta_p, &gf.d_theta_p),
        constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn test_cfg(nx: usize, nz: usize, alpha1: f64) -> DualConfig {
        let q_x = vec![1.0 / nx as f64; nx];
        let p_z = vec![1.0 / nz as f64; nz];
        serde_json::from_value(serde_json::json!({
            "q_x": q_x, "p_z": p_z, "alpha1": alpha1,
            "constraints": [
                {"kind": "neg_elbo", "epsilon": 2.0},
                {"kind": "mmd_z", "epsilon": 0.05},
                {"kind": "kl_z_qp", "epsilon": 0.5},
                {"kind": "kl_z_pq", "epsilon": 0.5},
                {"kind": "kl_joint_qp", "epsilon": 1.0}
            ],
            "seed": 1
        }))
        .unwrap()
    }

    fn random_state(rng: &mut StdRng, nx: usize, nz: usize) -> DualState {
        let mut logits_q = Matrix::zeros(nx, nz);
        let mut logits_p = Matrix::zeros(nz, nx);
        for v in logits_q.data.iter_mut().chain(logits_p.data.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        DualState {
            logits_q,
            logits_p,
            lambdas: vec![1.0; 5],
        }
    }

    /// Central finite differences on the logits.
    fn fd_grad(
        state: &DualState,
        cfg: &DualConfig,
        value: &dyn Fn(&DualState) -> f64,
    ) -> (Matrix, Matrix) {
        let h = 1e-5;
        let mut gq = Matrix::zeros(state.logits_q.rows, state.logits_q.cols);
        let mut gp = Matrix::zeros(state.logits_p.rows, state.logits_p.cols);
        for idx in 0..state.logits_q.data.len() {
            let mut plus = state.clone();
            plus.logits_q.data[idx] += h;
            let mut minus = state.clone();
            minus.logits_q.data[idx] -= h;
            gq.data[idx] = (value(&plus) - value(&minus)) / (2.0 * h);
        }
        for idx in 0..state.logits_p.data.len() {
            let mut plus = state.clone();
            plus.logits_p.data[idx] += h;
            let mut minus = state.clone();
            minus.logits_p.data[idx] -= h;
            gp.data[idx] = (value(&plus) - value(&minus)) / (2.0 * h);
        }
        let _ = cfg;
        (gq, gp)
    }

    fn assert_close(analytic: &Matrix, fd: &Matrix, label: &str) {
        for (a, b) in analytic.data.iter().zip(&fd.data) {
            let scale = a.abs().max(b.abs()).max(1e-8);
            assert!(
                (a - b).abs() / scale < 1e-5,
                "{label}: analytic {a} vs fd {b}"
            );
        }
    }

    #[test]
    fn objective_gradients_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(7);
        for &alpha1 in &[1.5, -1.5, 0.0] {
            for _ in 0..4 {
                let nx = rng.gen_range(2..=6);
                let nz = rng.gen_range(2..=6);
                let cfg = test_cfg(nx, nz, alpha1);
                let state = random_state(&mut rng, nx, nz);
                let g = gradients(&state, &cfg).unwrap();
                let (fq, fp) = fd_grad(&state, &cfg, &|s| {
                    bound_objective(&s.model(&cfg), cfg.alpha1, cfg.alpha2)
                });
                assert_close(&g.f_logits_q, &fq, "f wrt logits_q");
                assert_close(&g.f_logits_p, &fp, "f wrt logits_p");
            }
        }
    }

    #[test]
    fn constraint_gradients_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..4 {
            let nx = rng.gen_range(2..=5);
            let nz = rng.gen_range(2..=5);
            let cfg = test_cfg(nx, nz, -1.0);
            let state = random_state(&mut rng, nx, nz);
            let g = gradients(&state, &cfg).unwrap();
            for (k, spec) in cfg.constraints.iter().enumerate() {
                let kind = spec.kind;
                let sigma = cfg.kernel_sigma;
                let (fq, fp) = fd_grad(&state, &cfg, &|s| {
                    constraint_value(&s.model(&cfg), kind, sigma)
                });
                assert_close(&g.constraints[k].0, &fq, kind.name());
                assert_close(&g.constraints[k].1, &fp, kind.name());
            }
        }
    }

    #[test]
    fn lower_bound_gradient_wrt_encoder_is_linear_form() {
        // at fixed theta_p the reconstruction gradient w.r.t. theta_q is
        // exactly q(x)·log p(x|z); the entropy constant contributes nothing
        let mut rng = StdRng::seed_from_u64(9);
        let cfg = test_cfg(3, 2, -1.0);
        let state = random_state(&mut rng, 3, 2);
        let m = state.model(&cfg);
        let g = grad_lower_q(&m);
        for i in 0..3 {
            for j in 0..2 {
                let expect = m.q_x[i] * m.theta_p.get(j, i).ln();
                assert!((g.d_theta_q.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn feasible_interior_point_has_no_ascent_pressure() {
        // at a consistent model with slack budgets, every D − ε is negative
        let cfg = test_cfg(3, 3, 0.0);
        let state = DualState {
            logits_q: Matrix::zeros(3, 3),
            logits_p: Matrix::zeros(3, 3),
            lambdas: vec![1.0; 5],
        };
        let m = state.model(&cfg);
        for spec in &cfg.constraints {
            let d = constraint_value(&m, spec.kind, cfg.kernel_sigma);
            let eps = spec.epsilon.unwrap();
            assert!(
                d < eps,
                "{}: D = {d} not inside budget {eps}",
                spec.kind.name()
            );
        }
    }

    #[test]
    fn infinite_constraint_is_reported() {
        let mut cfg = test_cfg(2, 2, -1.0);
        cfg.p_z = vec![1.0, 0.0]; // q(z) always positive on z=1 -> KL infinite
        let state = DualState {
            logits_q: Matrix::zeros(2, 2),
            logits_p: Matrix::zeros(2, 2),
            lambdas: vec![1.0; 5],
        };
        match gradients(&state, &cfg) {
            Err(OptimError::InfiniteConstraint { name }) => {
                assert_eq!(name, "neg_elbo");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
