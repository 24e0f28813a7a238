use serde::Serialize;

use crate::objective_language::{builtin_matrix, BuiltinMatrix};
use crate::term_algebra::RationalMatrix;

/// The matrix set the closure check runs against. Tests can perturb a copy
/// to confirm the check actually bites.
#[derive(Debug, Clone)]
pub struct ClosureMatrices {
    pub r: RationalMatrix,
    pub p: RationalMatrix,
    pub t_lb: RationalMatrix,
    pub t_ulf: RationalMatrix,
    pub t_blf: RationalMatrix,
    pub s_vmi: RationalMatrix,
    pub s_beta_vae: RationalMatrix,
    pub s_info_gan: RationalMatrix,
    pub s_info_vae: RationalMatrix,
    pub s_info_bi_gan: RationalMatrix,
}

impl ClosureMatrices {
    pub fn standard() -> Self {
        Self {
            r: builtin_matrix(BuiltinMatrix::R),
            p: builtin_matrix(BuiltinMatrix::P),
            t_lb: builtin_matrix(BuiltinMatrix::TLb),
            t_ulf: builtin_matrix(BuiltinMatrix::TUlf),
            t_blf: builtin_matrix(BuiltinMatrix::TBlf),
            s_vmi: builtin_matrix(BuiltinMatrix::SVmi),
            s_beta_vae: builtin_matrix(BuiltinMatrix::SBetaVae),
            s_info_gan: builtin_matrix(BuiltinMatrix::SInfoGan),
            s_info_vae: builtin_matrix(BuiltinMatrix::SInfoVae),
            s_info_bi_gan: builtin_matrix(BuiltinMatrix::SInfoBiGan),
        }
    }
}

/// The six subspace dimensions, paired per hardness class.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ClosureReport {
    /// dim(S_βVAE + S_VMI + P)
    pub family_lb: usize,
    /// dim((T_lb + P) ∩ (R + P))
    pub intersect_lb: usize,
    /// dim(S_InfoGAN + S_InfoVAE + P)
    pub family_ulf: usize,
    /// dim((T_ulf + P) ∩ (R + P))
    pub intersect_ulf: usize,
    /// dim(S_InfoBiGAN + S_InfoVAE + P)
    pub family_blf: usize,
    /// dim((T_blf + P) ∩ (R + P))
    pub intersect_blf: usize,
    pub pass: bool,
}

impl ClosureReport {
    pub fn dims(&self) -> [usize; 6] {
        [
            self.family_lb,
            self.intersect_lb,
            self.family_ulf,
            self.intersect_ulf,
            self.family_blf,
            self.intersect_blf,
        ]
    }

    pub const EXPECTED: [usize; 6] = [13, 13, 17, 17, 18, 18];
}

fn family_dim(a: &RationalMatrix, b: &RationalMatrix, p: &RationalMatrix) -> usize {
    a.hcat(b)
        .and_then(|ab| ab.hcat(p))
        .expect("20-row matrices")
        .rank()
}

fn intersect_dim(t: &RationalMatrix, r: &RationalMatrix, p: &RationalMatrix) -> usize {
    let tp = t.hcat(p).expect("20-row matrices");
    let rp = r.hcat(p).expect("20-row matrices");
    tp.subspace_intersect(&rp).expect("20-row matrices").rank()
}

/// Recomputes the closure-theorem dimension table on the given matrices.
pub fn verify_closure_with(m: &ClosureMatrices) -> ClosureReport {
    let family_lb = family_dim(&m.s_beta_vae, &m.s_vmi, &m.p);
    let intersect_lb = intersect_dim(&m.t_lb, &m.r, &m.p);
    let family_ulf = family_dim(&m.s_info_gan, &m.s_info_vae, &m.p);
    let intersect_ulf = intersect_dim(&m.t_ulf, &m.r, &m.p);
    let family_blf = family_dim(&m.s_info_bi_gan, &m.s_info_vae, &m.p);
    let intersect_blf = intersect_dim(&m.t_blf, &m.r, &m.p);
    let report = ClosureReport {
        family_lb,
        intersect_lb,
        family_ulf,
        intersect_ulf,
        family_blf,
        intersect_blf,
        pass: false,
    };
    let pass = report.dims() == ClosureReport::EXPECTED;
    ClosureReport { pass, ..report }
}

/// Dimension table on the frozen standard matrices.
pub fn verify_closure() -> ClosureReport {
    verify_closure_with(&ClosureMatrices::standard())
}
