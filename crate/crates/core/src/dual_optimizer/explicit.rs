//! Assembled coefficient form of the budget-scaled dual objective for the
//! two-constraint instantiation (reconstruction bound + latent MMD).
//!
//! With budgets normalized into the constraint terms, the whole dual
//! objective collapses to a reconstruction coefficient, a rate
//! coefficient, an MMD coefficient and constants — convenient both for
//! implementation and for reading off stability: the likelihood weight
//! stays non-positive and every constraint weight non-negative for all
//! λ ≥ 0, whichever bound the preference sign selects.

use num::Zero;

use crate::term_algebra::Rational;

/// Exact coefficients of the assembled objective
/// `c_recon · E_q[log p(x|z)] + c_rate · Ī_q + c_mmd · MMD − (λ₁ + λ₂)
///  + c_entropy · H_q(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitObjective {
    pub recon_coeff: Rational,
    pub rate_coeff: Rational,
    pub mmd_coeff: Rational,
    /// −(λ₁ + λ₂), the budget-normalization constant.
    pub lambda_constant: Rational,
    /// Weight on the (constant) data entropy; nonzero only in the
    /// lower-bound branch.
    pub entropy_coeff: Rational,
}

/// Assembles the explicit objective for preference `alpha1`, multipliers
/// `(λ₁, λ₂)` and budgets `(ε₁, ε₂)` under ε⁻¹ scaling. The α₁ ≥ 0 branch
/// carries the upper bound, the α₁ < 0 branch the lower bound.
pub fn explicit_objective(
    alpha1: &Rational,
    lambda1: &Rational,
    lambda2: &Rational,
    eps1: &Rational,
    eps2: &Rational,
) -> ExplicitObjective {
    let l1e = lambda1 / eps1;
    let l2e = lambda2 / eps2;
    let lambda_constant = -(lambda1 + lambda2);
    if alpha1 >= &Rational::zero() {
        // α₁·Ī_q + λ₁ε₁⁻¹(−ELBO) + λ₂ε₂⁻¹·MMD − λ₁ − λ₂
        ExplicitObjective {
            recon_coeff: -l1e.clone(),
            rate_coeff: &l1e + alpha1,
            mmd_coeff: l2e,
            lambda_constant,
            entropy_coeff: Rational::zero(),
        }
    } else {
        // α₁·I̲_q + λ₁ε₁⁻¹(−ELBO) + λ₂ε₂⁻¹·MMD − λ₁ − λ₂
        ExplicitObjective {
            recon_coeff: alpha1 - &l1e,
            rate_coeff: l1e,
            mmd_coeff: l2e,
            lambda_constant,
            entropy_coeff: alpha1.clone(),
        }
    }
}

impl ExplicitObjective {
    /// The stability property read off the assembled coefficients: the
    /// likelihood weight is non-positive and both constraint weights
    /// non-negative.
    pub fn is_stable(&self) -> bool {
        let zero = Rational::zero();
        self.recon_coeff <= zero && self.rate_coeff >= zero && self.mmd_coeff >= zero
    }
}
