//! Frozen constant matrices over the 20-term basis.
//!
//! These tables are transcriptions, kept independent of the symbolic
//! encoder on purpose: a test cross-checks every column against
//! [`super::encode_kl`] expansions, so a slip in either copy surfaces.
//! Sign convention: every divergence column encodes the divergence itself
//! (`E_lead[log lead] − E_lead[log other]`), on the q side as well as the
//! p side, and the twelve columns of `R` follow the coefficient-slot order
//! of [`super::KlExpression::ALL`].
//!
//! Row order is the canonical basis (see [`crate::term_algebra::TermVector`]).

use crate::term_algebra::RationalMatrix;

/// Matrix families available through [`builtin_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinMatrix {
    /// 20×12: the twelve KL Lagrangian expressions.
    R,
    /// 20×10: elementary null expressions (eight chain-rule identities and
    /// the two θ-independent constants).
    P,
    /// 20×8: likelihood-based terms.
    TLb,
    /// 20×12: unary likelihood-free terms.
    TUlf,
    /// 20×14: binary likelihood-free terms.
    TBlf,
    /// 20×1: span of the variational-MI objective.
    SVmi,
    /// 20×2: span of the β-weighted autoencoder family.
    SBetaVae,
    /// 20×3: span of the InfoGAN family.
    SInfoGan,
    /// 20×4: span of the InfoVAE family.
    SInfoVae,
    /// 20×4: span of the InfoBiGAN family.
    SInfoBiGan,
}

#[rustfmt::skip]
const R_ROWS: [[i64; 12]; 20] = [
    // I_q  I_p pj|qj qj|pj px|qx qx|px pz|qz qz|pz pzx|qzx qzx|pzx pxz|qxz qxz|pxz
    [   0,   0,   1,   0,   0,   0,   0,   0,   0,   0,   0,   0], // E_p[log p(x,z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   1,   0], // E_p[log p(x|z)]
    [   0,   1,   0,   0,   0,   0,   0,   0,   1,   0,   0,   0], // E_p[log p(z|x)]
    [   0,   0,   0,   0,   1,   0,   0,   0,   0,   0,   0,   0], // E_p[log p(x)]
    [   0,  -1,   0,   0,   0,   0,   1,   0,   0,   0,   0,   0], // E_p[log p(z)]
    [   0,   0,  -1,   0,   0,   0,   0,   0,   0,   0,   0,   0], // E_p[log q(x,z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,  -1,   0], // E_p[log q(x|z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,  -1,   0,   0,   0], // E_p[log q(z|x)]
    [   0,   0,   0,   0,  -1,   0,   0,   0,   0,   0,   0,   0], // E_p[log q(x)]
    [   0,   0,   0,   0,   0,   0,  -1,   0,   0,   0,   0,   0], // E_p[log q(z)]
    [   0,   0,   0,  -1,   0,   0,   0,   0,   0,   0,   0,   0], // E_q[log p(x,z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,  -1], // E_q[log p(x|z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,   0,  -1,   0,   0], // E_q[log p(z|x)]
    [   0,   0,   0,   0,   0,  -1,   0,   0,   0,   0,   0,   0], // E_q[log p(x)]
    [   0,   0,   0,   0,   0,   0,   0,  -1,   0,   0,   0,   0], // E_q[log p(z)]
    [   0,   0,   0,   1,   0,   0,   0,   0,   0,   0,   0,   0], // E_q[log q(x,z)]
    [   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   0,   1], // E_q[log q(x|z)]
    [   1,   0,   0,   0,   0,   0,   0,   0,   0,   1,   0,   0], // E_q[log q(z|x)]
    [   0,   0,   0,   0,   0,   1,   0,   0,   0,   0,   0,   0], // E_q[log q(x)]
    [  -1,   0,   0,   0,   0,   0,   0,   1,   0,   0,   0,   0], // E_q[log q(z)]
];

#[rustfmt::skip]
const P_ROWS: [[i64; 10]; 20] = [
    // chain-rule splits of each joint atom (x|z then z|x), plus the two
    // θ-independent constants E_p[log p(z)] and E_q[log q(x)]
    [ 1,  1,  0,  0,  0,  0,  0,  0,  0,  0],
    [-1,  0,  0,  0,  0,  0,  0,  0,  0,  0],
    [ 0, -1,  0,  0,  0,  0,  0,  0,  0,  0],
    [ 0, -1,  0,  0,  0,  0,  0,  0,  0,  0],
    [-1,  0,  1,  0,  0,  0,  0,  0,  0,  0],
    [ 0,  0,  0,  1,  1,  0,  0,  0,  0,  0],
    [ 0,  0,  0, -1,  0,  0,  0,  0,  0,  0],
    [ 0,  0,  0,  0, -1,  0,  0,  0,  0,  0],
    [ 0,  0,  0,  0, -1,  0,  0,  0,  0,  0],
    [ 0,  0,  0, -1,  0,  0,  0,  0,  0,  0],
    [ 0,  0,  0,  0,  0,  1,  1,  0,  0,  0],
    [ 0,  0,  0,  0,  0, -1,  0,  0,  0,  0],
    [ 0,  0,  0,  0,  0,  0, -1,  0,  0,  0],
    [ 0,  0,  0,  0,  0,  0, -1,  0,  0,  0],
    [ 0,  0,  0,  0,  0, -1,  0,  0,  0,  0],
    [ 0,  0,  0,  0,  0,  0,  0,  1,  1,  0],
    [ 0,  0,  0,  0,  0,  0,  0, -1,  0,  0],
    [ 0,  0,  0,  0,  0,  0,  0,  0, -1,  0],
    [ 0,  0,  0,  0,  0,  0,  0,  0, -1,  1],
    [ 0,  0,  0,  0,  0,  0,  0, -1,  0,  0],
];

#[rustfmt::skip]
const T_LB_ROWS: [[i64; 8]; 20] = [
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
];

#[rustfmt::skip]
const T_ULF_ROWS: [[i64; 12]; 20] = [
    // p-side T1 (4), KL(p(x)||q(x)), KL(p(z)||q(z)),
    // q-side T1 (4), KL(q(x)||p(x)), KL(q(z)||p(z))
    [1, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 1, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  1,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 1, 0,  0,  1, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 1,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0, -1,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0, -1, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 1, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 1, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0, -1,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 1, 0,  0, -1],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 1,  0,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  1,  0],
    [0, 0, 0, 0,  0,  0, 0, 0, 0, 0,  0,  1],
];

#[rustfmt::skip]
const T_BLF_ROWS: [[i64; 14]; 20] = [
    // p-side T1, unary KLs, KL(p(x,z)||q(x,z));
    // q-side T1, unary KLs, KL(q(x,z)||p(x,z))
    [1, 0, 0, 0,  0,  0,  1, 0, 0, 0, 0,  0,  0,  0],
    [0, 1, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  1,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 1, 0,  0,  1,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0, -1, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 1,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0, -1,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0, -1,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 1, 0, 0, 0,  0,  0, -1],
    [0, 0, 0, 0,  0,  0,  0, 0, 1, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0, -1,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 1, 0,  0, -1,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  1],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 1,  0,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  1,  0,  0],
    [0, 0, 0, 0,  0,  0,  0, 0, 0, 0, 0,  0,  1,  0],
];

#[rustfmt::skip]
const S_VMI_ROWS: [[i64; 1]; 20] = [
    [0], [0], [0], [0], [1], [0], [0], [-1], [0], [0],
    [0], [0], [0], [0], [0], [0], [0], [0], [0], [0],
];

// The second column's E_q[log q(x|z)] entry is +1: the displayed -1 in the
// source material contradicts its own family definition (the column must
// equal I_q + KL(q(z)||p(z)) up to null expressions) and is corrected here;
// the catalog cross-check test pins this down.
#[rustfmt::skip]
const S_BETA_VAE_ROWS: [[i64; 2]; 20] = [
    [ 0,  0], [ 0,  0], [ 0,  0], [ 0,  0], [ 0,  0],
    [ 0,  0], [ 0,  0], [ 0,  0], [ 0,  0], [ 0,  0],
    [ 0,  0], [-1,  0], [ 0,  0], [ 0,  0], [ 0, -1],
    [ 0,  0], [ 0,  1], [ 0,  0], [ 1,  1], [ 0,  1],
];

#[rustfmt::skip]
const S_INFOGAN_ROWS: [[i64; 3]; 20] = [
    [ 0,  0,  0], [-1,  0,  0], [ 1,  0,  0], [ 1,  1,  0], [ 0,  0,  0],
    [ 0,  0,  0], [ 0,  0,  0], [-1,  0,  0], [ 0, -1,  0], [ 0,  0,  0],
    [ 0,  0,  0], [ 0,  0,  0], [ 0,  0,  0], [ 0,  0, -1], [ 0,  0,  0],
    [ 0,  0,  0], [ 0,  0,  0], [ 0,  0,  0], [ 0,  0,  1], [ 0,  0,  0],
];

#[rustfmt::skip]
const S_INFOVAE_ROWS: [[i64; 4]; 20] = [
    [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0],
    [ 0,  0,  0,  1],
    [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0],
    [ 0,  0,  0, -1],
    [ 0,  0,  0,  0], [ 0, -1,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0],
    [ 0,  0, -1,  0],
    [ 0,  0,  0,  0], [ 0,  1,  0,  0], [ 1,  0,  0,  0], [ 0,  0,  0,  0],
    [-1,  0,  1,  0],
];

#[rustfmt::skip]
const S_INFOBIGAN_ROWS: [[i64; 4]; 20] = [
    [ 0,  0,  0,  0], [ 1,  0,  0,  0], [ 0,  1,  0,  0], [-1,  0,  1,  0],
    [ 0,  0,  0,  0],
    [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0, -1,  0,  0], [ 0,  0, -1,  0],
    [ 0,  0,  0,  0],
    [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0, -1],
    [ 0,  0,  0,  0],
    [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  0], [ 0,  0,  0,  1],
    [ 0,  0,  0,  0],
];

fn build<const C: usize>(rows: &[[i64; C]; 20]) -> RationalMatrix {
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    RationalMatrix::from_i64_rows(&refs)
}

/// Returns the frozen matrix for the requested family.
pub fn builtin_matrix(kind: BuiltinMatrix) -> RationalMatrix {
    match kind {
        BuiltinMatrix::R => build(&R_ROWS),
        BuiltinMatrix::P => build(&P_ROWS),
        BuiltinMatrix::TLb => build(&T_LB_ROWS),
        BuiltinMatrix::TUlf => build(&T_ULF_ROWS),
        BuiltinMatrix::TBlf => build(&T_BLF_ROWS),
        BuiltinMatrix::SVmi => build(&S_VMI_ROWS),
        BuiltinMatrix::SBetaVae => build(&S_BETA_VAE_ROWS),
        BuiltinMatrix::SInfoGan => build(&S_INFOGAN_ROWS),
        BuiltinMatrix::SInfoVae => build(&S_INFOVAE_ROWS),
        BuiltinMatrix::SInfoBiGan => build(&S_INFOBIGAN_ROWS),
    }
}

impl BuiltinMatrix {
    pub const ALL: [BuiltinMatrix; 10] = [
        BuiltinMatrix::R,
        BuiltinMatrix::P,
        BuiltinMatrix::TLb,
        BuiltinMatrix::TUlf,
        BuiltinMatrix::TBlf,
        BuiltinMatrix::SVmi,
        BuiltinMatrix::SBetaVae,
        BuiltinMatrix::SInfoGan,
        BuiltinMatrix::SInfoVae,
        BuiltinMatrix::SInfoBiGan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMatrix::R => "R",
            BuiltinMatrix::P => "P",
            BuiltinMatrix::TLb => "T_lb",
            BuiltinMatrix::TUlf => "T_ulf",
            BuiltinMatrix::TBlf => "T_blf",
            BuiltinMatrix::SVmi => "S_VMI",
            BuiltinMatrix::SBetaVae => "S_betaVAE",
            BuiltinMatrix::SInfoGan => "S_InfoGAN",
            BuiltinMatrix::SInfoVae => "S_InfoVAE",
            BuiltinMatrix::SInfoBiGan => "S_InfoBiGAN",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}
