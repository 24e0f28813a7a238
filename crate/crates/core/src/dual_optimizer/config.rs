use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular_engine::ModelError;

/// Constraint kinds supported by the dual loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `−ELBO ≤ ε` (the joint-KL constraint shifted by the data entropy).
    NegElbo,
    /// Squared MMD between q(z) and the prior.
    MmdZ,
    /// `KL(q(x,z) ‖ p(x,z)) ≤ ε`.
    KlJointQp,
    /// `KL(q(z) ‖ p(z)) ≤ ε`.
    KlZQp,
    /// `KL(p(z) ‖ q(z)) ≤ ε`.
    KlZPq,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::NegElbo => "neg_elbo",
            ConstraintKind::MmdZ => "mmd_z",
            ConstraintKind::KlJointQp => "kl_joint_qp",
            ConstraintKind::KlZQp => "kl_z_qp",
            ConstraintKind::KlZPq => "kl_z_pq",
        }
    }

    /// Fixed multiplier used during constraint-only budget selection;
    /// MMD is weighted two orders heavier, matching the recommendation
    /// the selection procedure is built on.
    pub fn selection_lambda(self) -> f64 {
        match self {
            ConstraintKind::MmdZ => 100.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    /// Budget; may be omitted when the config carries slack vectors and
    /// the budget is to be selected by the constraint-only run.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn default_rho_theta() -> f64 {
    0.05
}
fn default_rho_lambda() -> f64 {
    0.5
}
fn default_iters() -> usize {
    20_000
}
fn default_sigma() -> f64 {
    1.0
}
fn default_restarts() -> usize {
    120
}
fn default_stages() -> usize {
    5
}
fn default_inner() -> usize {
    1_500
}
fn default_oracle_step() -> f64 {
    0.1
}
fn default_penalty() -> f64 {
    10.0
}

/// Full configuration of a dual run (and of the oracle attacking the same
/// primal problem).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualConfig {
    /// Optional explicit sizes; validated against the vectors when given.
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub nz: Option<usize>,
    pub q_x: Vec<f64>,
    pub p_z: Vec<f64>,
    /// Information preference on the q side; the sign selects the bound.
    pub alpha1: f64,
    /// p-side preference; zero in the standard instantiation.
    #[serde(default)]
    pub alpha2: f64,
    pub constraints: Vec<ConstraintSpec>,
    /// Additive slack per constraint, applied to the selected budgets.
    #[serde(default)]
    pub gamma_abs: Option<Vec<f64>>,
    /// Relative slack per constraint (fraction of the selected budget).
    #[serde(default)]
    pub gamma_rel: Option<Vec<f64>>,
    #[serde(default = "default_rho_theta")]
    pub rho_theta: f64,
    #[serde(default = "default_rho_lambda")]
    pub rho_lambda: f64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    pub seed: u64,
    /// Iteration budget of the constraint-only selection run; defaults to
    /// `iters`.
    #[serde(default)]
    pub select_iters: Option<usize>,
    /// Frozen multipliers: presence switches the run to the fixed-λ
    /// baseline.
    #[serde(default)]
    pub baseline_lambdas: Option<Vec<f64>>,
    /// Opt-in ε⁻¹ scaling of the constraint terms.
    #[serde(default)]
    pub eps_scaled: bool,
    #[serde(default = "default_sigma")]
    pub kernel_sigma: f64,
    #[serde(default = "default_restarts")]
    pub oracle_restarts: usize,
    #[serde(default = "default_stages")]
    pub oracle_stages: usize,
    #[serde(default = "default_inner")]
    pub oracle_inner_iters: usize,
    #[serde(default = "default_oracle_step")]
    pub oracle_step: f64,
    #[serde(default = "default_penalty")]
    pub oracle_penalty0: f64,
}

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constraint {name} is infinite at the current state")]
    InfiniteConstraint { name: String },
    #[error("constraints stayed infinite for {streak} consecutive iterations (trace of {rows} rows attached)")]
    Diverged { streak: usize, rows: usize },
    #[error("no feasible point found across {restarts} oracle restarts")]
    Infeasible { restarts: usize },
    #[error("budget selection failed: {0}")]
    Selection(String),
}

impl DualConfig {
    pub fn nx(&self) -> usize {
        self.q_x.len()
    }

    pub fn nz(&self) -> usize {
        self.p_z.len()
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let err = |m: String| Err(OptimError::Config(m));
        if self.q_x.is_empty() || self.p_z.is_empty() {
            return err("q_x and p_z must be nonempty".into());
        }
        if let Some(nx) = self.nx {
            if nx != self.q_x.len() {
                return err(format!("nx = {nx} but q_x has length {}", self.q_x.len()));
            }
        }
        if let Some(nz) = self.nz {
            if nz != self.p_z.len() {
                return err(format!("nz = {nz} but p_z has length {}", self.p_z.len()));
            }
        }
        for (what, v) in [("q_x", &self.q_x), ("p_z", &self.p_z)] {
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || v.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return err(format!("{what} is not a probability vector"));
            }
        }
        if self.constraints.is_empty() {
            return err("at least one constraint is required".into());
        }
        if !(self.rho_theta > 0.0) || !(self.rho_lambda > 0.0) {
            return err("step sizes must be positive".into());
        }
        for c in &self.constraints {
            if let Some(e) = c.epsilon {
                if !(e > 0.0) || !e.is_finite() {
                    return err(format!("epsilon for {} must be finite and > 0", c.kind.name()));
                }
            }
        }
        for (label, g) in [("gamma_abs", &self.gamma_abs), ("gamma_rel", &self.gamma_rel)] {
            if let Some(g) = g {
                if g.len() != self.constraints.len() {
                    return err(format!(
                        "{label} must have one entry per constraint ({} vs {})",
                        g.len(),
                        self.constraints.len()
                    ));
                }
                if g.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                    return err(format!("{label} entries must be ≥ 0"));
                }
            }
        }
        if let Some(l) = &self.baseline_lambdas {
            if l.len() != self.constraints.len() {
                return err(format!(
                    "baseline_lambdas must have one entry per constraint ({} vs {})",
                    l.len(),
                    self.constraints.len()
                ));
            }
            if l.iter().any(|&x| x < 0.0) {
                return err("baseline_lambdas must be ≥ 0".into());
            }
        }
        if !(self.kernel_sigma > 0.0) {
            return err("kernel_sigma must be positive".into());
        }
        Ok(())
    }

    /// True when slack vectors request budget selection.
    pub fn wants_selection(&self) -> bool {
        self.gamma_abs.is_some() || self.gamma_rel.is_some()
    }

    pub fn from_json(text: &str) -> Result<Self, OptimError> {
        let cfg: DualConfig = serde_json::from_str(text)
            .map_err(|e| OptimError::Config(format!("invalid config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> DualConfig {
        serde_json::from_value(serde_json::json!({
            "q_x": [0.5, 0.3, 0.2],
            "p_z": [0.6, 0.4],
            "alpha1": -1.0,
            "constraints": [
                {"kind": "neg_elbo", "epsilon": 1.2},
                {"kind": "mmd_z", "epsilon": 0.01}
            ],
            "seed": 7
        }))
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = base();
        cfg.validate().unwrap();
        assert_eq!(cfg.rho_theta, 0.05);
        assert_eq!(cfg.rho_lambda, 0.5);
        assert_eq!(cfg.iters, 20_000);
        assert_eq!(cfg.alpha2, 0.0);
        assert!(!cfg.eps_scaled);
    }

    #[test]
    fn validation_catches_errors() {
        let mut cfg = base();
        cfg.q_x = vec![0.5, 0.6];
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.constraints[0].epsilon = Some(-1.0);
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.gamma_abs = Some(vec![0.1]);
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.nx = Some(4);
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.rho_theta = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_key_is_named() {
        let e = DualConfig::from_json("{\"q_x\": [1.0]}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("p_z"), "{msg}");
    }
}
