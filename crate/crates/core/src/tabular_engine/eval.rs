use thiserror::Error;

use super::kernel::{mmd_marginal, KernelError, KernelSpec};
use super::model::{ModelDistributions, TabularModel};
use crate::objective_language::{
    AtomKind, BasisTerm, DistRef, DivergenceAtom, Family, KlExpression, LagrangianObjective,
    Signature,
};
use crate::term_algebra::to_f64;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no evaluator registered for atom {atom}")]
    UnsupportedAtom { atom: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Plug-in evaluator for W and f-divergence atoms.
pub type AtomEvaluator = Box<dyn Fn(&TabularModel, &DivergenceAtom) -> Result<f64, EvalError>>;

/// Evaluation context: MMD kernel choice plus optional plug-in evaluators
/// for the divergences that have no canonical tabular form.
pub struct EvalOptions {
    pub kernel: KernelSpec,
    pub w_evaluator: Option<AtomEvaluator>,
    pub f_evaluator: Option<AtomEvaluator>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            w_evaluator: None,
            f_evaluator: None,
        }
    }
}

/// `Σ_i a_i · ln(a_i / b_i)` with the 0·log 0 = 0 convention; a positive
/// `a_i` over `b_i = 0` yields +∞.
fn kl_vec(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > 0.0 {
            if bi > 0.0 {
                acc += ai * (ai / bi).ln();
            } else {
                return f64::INFINITY;
            }
        }
    }
    acc
}

fn atom_value(m: &TabularModel, d: &ModelDistributions, atom: DistRef, i: usize, j: usize) -> f64 {
    match (atom.family, atom.signature) {
        (Family::P, Signature::Joint) => d.p_joint.get(i, j),
        (Family::P, Signature::CondXGivenZ) => m.theta_p.get(j, i),
        (Family::P, Signature::CondZGivenX) => d.p_z_given_x.get(i, j),
        (Family::P, Signature::MargX) => d.p_x[i],
        (Family::P, Signature::MargZ) => m.p_z[j],
        (Family::Q, Signature::Joint) => d.q_joint.get(i, j),
        (Family::Q, Signature::CondXGivenZ) => d.q_x_given_z.get(i, j),
        (Family::Q, Signature::CondZGivenX) => m.theta_q.get(i, j),
        (Family::Q, Signature::MargX) => m.q_x[i],
        (Family::Q, Signature::MargZ) => d.q_z[j],
    }
}

/// Exact expectation of one basis term: the double summation of the log
/// atom under the outer joint. Returns −∞ when a positive-mass event hits
/// a zero inner probability.
pub fn eval_term(m: &TabularModel, basis_index: usize) -> f64 {
    let term = BasisTerm::from_index(basis_index);
    let d = m.distributions();
    let mut acc = 0.0;
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            let w = match term.outer {
                Family::P => d.p_joint.get(i, j),
                Family::Q => d.q_joint.get(i, j),
            };
            if w > 0.0 {
                let v = atom_value(m, &d, term.atom, i, j);
                if v > 0.0 {
                    acc += w * v.ln();
                } else {
                    return f64::NEG_INFINITY;
                }
            }
        }
    }
    acc
}

/// One of the twelve KL Lagrangian expressions, computed directly from the
/// model distributions (not through the basis encoding).
pub fn eval_kl_expression(m: &TabularModel, d: &ModelDistributions, e: KlExpression) -> f64 {
    match e {
        KlExpression::InfoQ => {
            let mut acc = 0.0;
            for i in 0..m.nx() {
                for j in 0..m.nz() {
                    let w = d.q_joint.get(i, j);
                    if w > 0.0 {
                        acc += w * (w / (m.q_x[i] * d.q_z[j])).ln();
                    }
                }
            }
            acc
        }
        KlExpression::InfoP => {
            let mut acc = 0.0;
            for i in 0..m.nx() {
                for j in 0..m.nz() {
                    let w = d.p_joint.get(i, j);
                    if w > 0.0 {
                        acc += w * (w / (d.p_x[i] * m.p_z[j])).ln();
                    }
                }
            }
            acc
        }
        KlExpression::Kl { leading, signature } => match signature {
            Signature::Joint => match leading {
                Family::P => kl_vec(&d.p_joint.data, &d.q_joint.data),
                Family::Q => kl_vec(&d.q_joint.data, &d.p_joint.data),
            },
            Signature::MargX => match leading {
                Family::P => kl_vec(&d.p_x, &m.q_x),
                Family::Q => kl_vec(&m.q_x, &d.p_x),
            },
            Signature::MargZ => match leading {
                Family::P => kl_vec(&m.p_z, &d.q_z),
                Family::Q => kl_vec(&d.q_z, &m.p_z),
            },
            Signature::CondZGivenX => {
                // expectation over x under the leading family's marginal
                let mut acc = 0.0;
                for i in 0..m.nx() {
                    let (w, first, second): (f64, Vec<f64>, Vec<f64>) = match leading {
                        Family::P => (
                            d.p_x[i],
                            (0..m.nz()).map(|j| d.p_z_given_x.get(i, j)).collect(),
                            (0..m.nz()).map(|j| m.theta_q.get(i, j)).collect(),
                        ),
                        Family::Q => (
                            m.q_x[i],
                            (0..m.nz()).map(|j| m.theta_q.get(i, j)).collect(),
                            (0..m.nz()).map(|j| d.p_z_given_x.get(i, j)).collect(),
                        ),
                    };
                    if w > 0.0 {
                        acc += w * kl_vec(&first, &second);
                    }
                }
                acc
            }
            Signature::CondXGivenZ => {
                let mut acc = 0.0;
                for j in 0..m.nz() {
                    let (w, first, second): (f64, Vec<f64>, Vec<f64>) = match leading {
                        Family::P => (
                            m.p_z[j],
                            (0..m.nx()).map(|i| m.theta_p.get(j, i)).collect(),
                            (0..m.nx()).map(|i| d.q_x_given_z.get(i, j)).collect(),
                        ),
                        Family::Q => (
                            d.q_z[j],
                            (0..m.nx()).map(|i| d.q_x_given_z.get(i, j)).collect(),
                            (0..m.nx()).map(|i| m.theta_p.get(j, i)).collect(),
                        ),
                    };
                    if w > 0.0 {
                        acc += w * kl_vec(&first, &second);
                    }
                }
                acc
            }
        },
    }
}

/// Resolves a marginal or joint distribution reference to its probability
/// vector (joints flattened row-major).
fn dist_vector(m: &TabularModel, d: &ModelDistributions, r: DistRef) -> Option<Vec<f64>> {
    match (r.family, r.signature) {
        (Family::P, Signature::Joint) => Some(d.p_joint.data.clone()),
        (Family::Q, Signature::Joint) => Some(d.q_joint.data.clone()),
        (Family::P, Signature::MargX) => Some(d.p_x.clone()),
        (Family::Q, Signature::MargX) => Some(m.q_x.clone()),
        (Family::P, Signature::MargZ) => Some(m.p_z.clone()),
        (Family::Q, Signature::MargZ) => Some(d.q_z.clone()),
        _ => None,
    }
}

fn js_vec(a: &[f64], b: &[f64]) -> f64 {
    let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    0.5 * kl_vec(a, &mid) + 0.5 * kl_vec(b, &mid)
}

fn eval_atom(
    m: &TabularModel,
    d: &ModelDistributions,
    atom: &DivergenceAtom,
    opts: &EvalOptions,
) -> Result<f64, EvalError> {
    match atom.kind {
        AtomKind::Js => {
            let (Some(a), Some(b)) = (dist_vector(m, d, atom.left), dist_vector(m, d, atom.right))
            else {
                return Err(EvalError::UnsupportedAtom {
                    atom: atom.to_string(),
                });
            };
            Ok(js_vec(&a, &b))
        }
        AtomKind::Mmd => {
            let (Some(a), Some(b)) = (dist_vector(m, d, atom.left), dist_vector(m, d, atom.right))
            else {
                return Err(EvalError::UnsupportedAtom {
                    atom: atom.to_string(),
                });
            };
            let on_joint = atom.left.signature == Signature::Joint;
            Ok(mmd_marginal(&a, &b, &opts.kernel, on_joint.then_some((m.nx(), m.nz())))?)
        }
        AtomKind::W => match &opts.w_evaluator {
            Some(f) => f(m, atom),
            None => Err(EvalError::UnsupportedAtom {
                atom: atom.to_string(),
            }),
        },
        AtomKind::F => match &opts.f_evaluator {
            Some(f) => f(m, atom),
            None => Err(EvalError::UnsupportedAtom {
                atom: atom.to_string(),
            }),
        },
    }
}

/// Value of a full objective on a model: the twelve KL expressions are
/// computed exactly from the distributions, directly written basis terms
/// through [`eval_term`], and atoms through their evaluators.
pub fn eval_objective(
    m: &TabularModel,
    obj: &LagrangianObjective,
    opts: &EvalOptions,
) -> Result<f64, EvalError> {
    let d = m.distributions();
    let mut acc = 0.0;
    for (e, c) in obj.kl_part.iter_nonzero() {
        acc += to_f64(c) * eval_kl_expression(m, &d, e);
    }
    for t in BasisTerm::all() {
        let c = obj.log_terms.get(t.index());
        if !num::Zero::is_zero(c) {
            acc += to_f64(c) * eval_term(m, t.index());
        }
    }
    for atom in &obj.atoms {
        acc += to_f64(&atom.weight) * eval_atom(m, &d, atom, opts)?;
    }
    Ok(acc)
}

/// Exact mutual information in nats under the chosen joint.
pub fn mutual_information(m: &TabularModel, side: Family) -> f64 {
    let d = m.distributions();
    let e = match side {
        Family::P => KlExpression::InfoP,
        Family::Q => KlExpression::InfoQ,
    };
    eval_kl_expression(m, &d, e)
}

/// Evidence lower bound in nats:
/// `E_q[log p(x|z)] − E_{q(x)}[KL(q(z|x) ‖ p(z))]`.
pub fn elbo(m: &TabularModel) -> f64 {
    let d = m.distributions();
    let mut recon = 0.0;
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            let w = d.q_joint.get(i, j);
            if w > 0.0 {
                let v = m.theta_p.get(j, i);
                if v > 0.0 {
                    recon += w * v.ln();
                } else {
                    return f64::NEG_INFINITY;
                }
            }
        }
    }
    let mut rate = 0.0;
    for i in 0..m.nx() {
        if m.q_x[i] > 0.0 {
            let row: Vec<f64> = (0..m.nz()).map(|j| m.theta_q.get(i, j)).collect();
            rate += m.q_x[i] * kl_vec(&row, &m.p_z);
        }
    }
    recon - rate
}
