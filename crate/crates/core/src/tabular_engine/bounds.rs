use super::eval::{eval_kl_expression, mutual_information};
use super::model::TabularModel;
use crate::objective_language::{Family, KlExpression, Signature};

/// Mutual information together with its convex upper and concave lower
/// bounds and the two bound gaps, for both joints.
#[derive(Debug, Clone)]
pub struct MiBounds {
    pub i_q: f64,
    /// `E_{q(x)}[KL(q(z|x) ‖ p(z))]`, the rate term.
    pub i_q_upper: f64,
    /// `E_q[log p(x|z)] + H_q(x)`, the reconstruction term plus entropy.
    pub i_q_lower: f64,
    /// `KL(q(z) ‖ p(z))` = upper − I_q.
    pub gap_upper_q: f64,
    /// `E_{q(z)}[KL(q(x|z) ‖ p(x|z))]` = I_q − lower.
    pub gap_lower_q: f64,
    pub i_p: f64,
    pub i_p_upper: f64,
    pub i_p_lower: f64,
    pub gap_upper_p: f64,
    pub gap_lower_p: f64,
}

/// Computes bounds and gaps, each side independently (the gap identities
/// are a consequence, not an implementation shortcut).
pub fn mi_bounds(m: &TabularModel) -> MiBounds {
    let d = m.distributions();
    let i_q = mutual_information(m, Family::Q);
    let i_p = mutual_information(m, Family::P);

    // q side: rate term and reconstruction term
    let mut i_q_upper = 0.0;
    for i in 0..m.nx() {
        if m.q_x[i] > 0.0 {
            for j in 0..m.nz() {
                let t = m.theta_q.get(i, j);
                if t > 0.0 {
                    if m.p_z[j] > 0.0 {
                        i_q_upper += m.q_x[i] * t * (t / m.p_z[j]).ln();
                    } else {
                        i_q_upper = f64::INFINITY;
                    }
                }
            }
        }
    }
    let mut recon_q = 0.0;
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            let w = d.q_joint.get(i, j);
            if w > 0.0 {
                let v = m.theta_p.get(j, i);
                if v > 0.0 {
                    recon_q += w * v.ln();
                } else {
                    recon_q = f64::NEG_INFINITY;
                }
            }
        }
    }
    let i_q_lower = recon_q + d.h_qx;

    // p side, symmetric roles
    let mut i_p_upper = 0.0;
    for j in 0..m.nz() {
        if m.p_z[j] > 0.0 {
            for i in 0..m.nx() {
                let t = m.theta_p.get(j, i);
                if t > 0.0 {
                    if m.q_x[i] > 0.0 {
                        i_p_upper += m.p_z[j] * t * (t / m.q_x[i]).ln();
                    } else {
                        i_p_upper = f64::INFINITY;
                    }
                }
            }
        }
    }
    let mut recon_p = 0.0;
    for i in 0..m.nx() {
        for j in 0..m.nz() {
            let w = d.p_joint.get(i, j);
            if w > 0.0 {
                let v = m.theta_q.get(i, j);
                if v > 0.0 {
                    recon_p += w * v.ln();
                } else {
                    recon_p = f64::NEG_INFINITY;
                }
            }
        }
    }
    let h_pz = -m
        .p_z
        .iter()
        .filter(|&&z| z > 0.0)
        .map(|&z| z * z.ln())
        .sum::<f64>();
    let i_p_lower = recon_p + h_pz;

    let gap_upper_q = eval_kl_expression(m, &d, KlExpression::kl(Family::Q, Signature::MargZ));
    let gap_lower_q = eval_kl_expression(m, &d, KlExpression::kl(Family::Q, Signature::CondXGivenZ));
    let gap_upper_p = eval_kl_expression(m, &d, KlExpression::kl(Family::P, Signature::MargX));
    let gap_lower_p = eval_kl_expression(m, &d, KlExpression::kl(Family::P, Signature::CondZGivenX));

    MiBounds {
        i_q,
        i_q_upper,
        i_q_lower,
        gap_upper_q,
        gap_lower_q,
        i_p,
        i_p_upper,
        i_p_lower,
        gap_upper_p,
        gap_lower_p,
    }
}
