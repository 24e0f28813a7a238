use std::fmt;

use num::Zero;
use thiserror::Error;

use crate::objective_language::{
    builtin_matrix, encode_kl, BuiltinMatrix, DistRef, DivergenceAtom, Family, LagrangianObjective,
    Signature,
};
use crate::term_algebra::{RationalMatrix, Rational, TermVector};

/// Computability classes, nested smallest to largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TractabilityClass {
    LikelihoodBased,
    UnaryLikelihoodFree,
    BinaryLikelihoodFree,
    NotComputable,
}

impl TractabilityClass {
    pub fn name(self) -> &'static str {
        match self {
            TractabilityClass::LikelihoodBased => "likelihood_based",
            TractabilityClass::UnaryLikelihoodFree => "unary_likelihood_free",
            TractabilityClass::BinaryLikelihoodFree => "binary_likelihood_free",
            TractabilityClass::NotComputable => "not_computable",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "likelihood_based" => Some(TractabilityClass::LikelihoodBased),
            "unary_likelihood_free" => Some(TractabilityClass::UnaryLikelihoodFree),
            "binary_likelihood_free" => Some(TractabilityClass::BinaryLikelihoodFree),
            "not_computable" => Some(TractabilityClass::NotComputable),
            _ => None,
        }
    }

    fn term_matrix(self) -> Option<BuiltinMatrix> {
        match self {
            TractabilityClass::LikelihoodBased => Some(BuiltinMatrix::TLb),
            TractabilityClass::UnaryLikelihoodFree => Some(BuiltinMatrix::TUlf),
            TractabilityClass::BinaryLikelihoodFree => Some(BuiltinMatrix::TBlf),
            TractabilityClass::NotComputable => None,
        }
    }
}

impl fmt::Display for TractabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Names for the columns of the term matrices, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractableTerm {
    /// A likelihood-based expectation term.
    Log { outer: Family, atom: DistRef },
    /// A marginal divergence pattern `D(lead(v) ‖ other(v))`.
    MargKl { leading: Family, on_z: bool },
    /// A joint divergence pattern `D(lead(x,z) ‖ other(x,z))`.
    JointKl { leading: Family },
}

impl TractableTerm {
    /// The column labels of the term matrix for `class`, in matrix order.
    pub fn columns(class: TractabilityClass) -> Vec<TractableTerm> {
        let mut cols = Vec::new();
        for fam in [Family::P, Family::Q] {
            for sig in [
                Signature::Joint,
                Signature::CondXGivenZ,
                Signature::MargZ,
            ] {
                cols.push(TractableTerm::Log {
                    outer: fam,
                    atom: DistRef::new(Family::P, sig),
                });
            }
            cols.push(TractableTerm::Log {
                outer: fam,
                atom: DistRef::new(Family::Q, Signature::CondZGivenX),
            });
            if class >= TractabilityClass::UnaryLikelihoodFree {
                cols.push(TractableTerm::MargKl {
                    leading: fam,
                    on_z: false,
                });
                cols.push(TractableTerm::MargKl {
                    leading: fam,
                    on_z: true,
                });
            }
            if class >= TractabilityClass::BinaryLikelihoodFree {
                cols.push(TractableTerm::JointKl { leading: fam });
            }
        }
        cols
    }
}

impl fmt::Display for TractableTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TractableTerm::Log { outer, atom } => {
                write!(f, "E_{}[log {}]", outer.letter(), atom)
            }
            TractableTerm::MargKl { leading, on_z } => {
                let sig = if *on_z { Signature::MargZ } else { Signature::MargX };
                write!(
                    f,
                    "KL({}||{})",
                    DistRef::new(*leading, sig),
                    DistRef::new(leading.other(), sig)
                )
            }
            TractableTerm::JointKl { leading } => write!(
                f,
                "KL({}||{})",
                DistRef::new(*leading, Signature::Joint),
                DistRef::new(leading.other(), Signature::Joint)
            ),
        }
    }
}

/// Certificate that an objective lies in a computability class.
#[derive(Debug, Clone)]
pub struct TractableDecomposition {
    /// Smallest class the objective belongs to.
    pub class: TractabilityClass,
    /// Coefficients on the term-matrix columns (zero entries omitted).
    pub tractable_coeffs: Vec<(TractableTerm, Rational)>,
    /// Coefficients on the ten elementary null expressions.
    pub null_witness: Vec<Rational>,
    /// Opaque atoms, passed through unchanged.
    pub atom_passthrough: Vec<DivergenceAtom>,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("objective contains {atom} which no elementary transformation can place in {target}")]
    AtomOutsideClass {
        atom: DivergenceAtom,
        target: TractabilityClass,
    },
    #[error("KL part is not representable in {target}; residual after projection attached")]
    NotRepresentable {
        target: TractabilityClass,
        residual: TermVector,
    },
}

fn atom_class(atom: &DivergenceAtom) -> TractabilityClass {
    // parse-time normalization dropped self-divergences, so the remaining
    // atoms pair one p-side with one q-side distribution
    match atom.left.signature {
        Signature::MargX | Signature::MargZ => TractabilityClass::UnaryLikelihoodFree,
        Signature::Joint => TractabilityClass::BinaryLikelihoodFree,
        Signature::CondXGivenZ | Signature::CondZGivenX => TractabilityClass::NotComputable,
    }
}

fn kl_class(v: &TermVector) -> TractabilityClass {
    let p = builtin_matrix(BuiltinMatrix::P);
    for class in [
        TractabilityClass::LikelihoodBased,
        TractabilityClass::UnaryLikelihoodFree,
        TractabilityClass::BinaryLikelihoodFree,
    ] {
        let t = builtin_matrix(class.term_matrix().expect("concrete class"));
        let tp = t.hcat(&p).expect("20-row matrices");
        if tp.member_of(v.coords()).expect("20-dim vector").is_some() {
            return class;
        }
    }
    TractabilityClass::NotComputable
}

/// Smallest computability class containing the objective.
pub fn classify(obj: &LagrangianObjective) -> TractabilityClass {
    let mut class = kl_class(&encode_kl(obj));
    for atom in &obj.atoms {
        class = class.max(atom_class(atom));
        if atom.left.family == atom.right.family {
            // cannot happen through the parser; defensive for hand-built atoms
            class = TractabilityClass::NotComputable;
        }
    }
    class
}

/// Exact orthogonal projection residual of `v` off `col(m)`, via rational
/// normal equations.
fn projection_residual(m: &RationalMatrix, v: &TermVector) -> TermVector {
    let mt = m.transpose();
    let gram = mt.mul(m).expect("gram");
    let rhs = mt.mul_vec(v.coords()).expect("m^T v");
    let coeffs = gram
        .member_of(&rhs)
        .expect("square system")
        .expect("normal equations are always consistent");
    let proj = m.mul_vec(&coeffs).expect("projection");
    let res: Vec<Rational> = v
        .coords()
        .iter()
        .zip(proj)
        .map(|(a, b)| a - b)
        .collect();
    TermVector::from_coords(res)
}

/// Rewrites the objective as tractable terms plus elementary null
/// expressions, bit-exactly, or reports why it cannot be done.
pub fn compile(
    obj: &LagrangianObjective,
    target: TractabilityClass,
) -> Result<TractableDecomposition, CompileError> {
    for atom in &obj.atoms {
        if atom_class(atom) > target {
            return Err(CompileError::AtomOutsideClass {
                atom: atom.clone(),
                target,
            });
        }
    }
    let v = encode_kl(obj);
    let t = builtin_matrix(
        target
            .term_matrix()
            .unwrap_or(BuiltinMatrix::TBlf),
    );
    let p = builtin_matrix(BuiltinMatrix::P);
    let tp = t.hcat(&p).expect("20-row matrices");
    let Some(sol) = tp.member_of(v.coords()).expect("20-dim vector") else {
        return Err(CompileError::NotRepresentable {
            target,
            residual: projection_residual(&tp, &v),
        });
    };
    let labels = TractableTerm::columns(target.min(TractabilityClass::BinaryLikelihoodFree));
    debug_assert_eq!(labels.len(), t.cols());
    let tractable_coeffs = labels
        .into_iter()
        .zip(&sol[..t.cols()])
        .filter(|(_, c)| !c.is_zero())
        .map(|(l, c)| (l, c.clone()))
        .collect();
    let null_witness = sol[t.cols()..].to_vec();
    debug_assert_eq!(tp.mul_vec(&sol).expect("verify"), v.coords());
    Ok(TractableDecomposition {
        class: classify(obj),
        tractable_coeffs,
        null_witness,
        atom_passthrough: obj.atoms.clone(),
    })
}

/// Elementary equivalence: identical opaque atoms and a KL-part difference
/// inside the null-expression span. Exact; no tolerance.
pub fn equivalent(a: &LagrangianObjective, b: &LagrangianObjective) -> bool {
    if a.atom_multiset() != b.atom_multiset() {
        return false;
    }
    let diff = encode_kl(a).sub(&encode_kl(b));
    builtin_matrix(BuiltinMatrix::P)
        .member_of(diff.coords())
        .expect("20-dim vector")
        .is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective_language::parse_objective;
    use crate::term_algebra::rat_int;

    #[test]
    fn column_labels_match_matrix_widths() {
        assert_eq!(
            TractableTerm::columns(TractabilityClass::LikelihoodBased).len(),
            8
        );
        assert_eq!(
            TractableTerm::columns(TractabilityClass::UnaryLikelihoodFree).len(),
            12
        );
        assert_eq!(
            TractableTerm::columns(TractabilityClass::BinaryLikelihoodFree).len(),
            14
        );
    }

    #[test]
    fn term_labels_encode_their_own_columns() {
        // the label of each column must itself parse/encode to the column
        for class in [
            TractabilityClass::LikelihoodBased,
            TractabilityClass::UnaryLikelihoodFree,
            TractabilityClass::BinaryLikelihoodFree,
        ] {
            let m = builtin_matrix(class.term_matrix().unwrap());
            for (j, label) in TractableTerm::columns(class).iter().enumerate() {
                let obj = parse_objective(&label.to_string()).unwrap();
                assert_eq!(
                    encode_kl(&obj).coords(),
                    m.column(j).as_slice(),
                    "{class} column {j} ({label})"
                );
            }
        }
    }

    #[test]
    fn bare_information_term_is_not_likelihood_based() {
        let obj = parse_objective("1*I_q").unwrap();
        assert_eq!(classify(&obj), TractabilityClass::UnaryLikelihoodFree);
        let err = compile(&obj, TractabilityClass::LikelihoodBased).unwrap_err();
        match err {
            CompileError::NotRepresentable { residual, .. } => {
                assert!(!residual.is_zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_objective_compiles_trivially() {
        let obj = parse_objective("0*I_q").unwrap();
        assert_eq!(classify(&obj), TractabilityClass::LikelihoodBased);
        let d = compile(&obj, TractabilityClass::LikelihoodBased).unwrap();
        assert!(d.tractable_coeffs.is_empty());
        assert!(d.null_witness.iter().all(Rational::is_zero));
    }

    #[test]
    fn conditional_js_renders_not_computable() {
        let obj = parse_objective("JS(q(z|x)||p(z|x))").unwrap();
        assert_eq!(classify(&obj), TractabilityClass::NotComputable);
        assert!(matches!(
            compile(&obj, TractabilityClass::BinaryLikelihoodFree),
            Err(CompileError::AtomOutsideClass { .. })
        ));
    }

    #[test]
    fn joint_js_needs_binary_class() {
        let obj = parse_objective("JS(q(x,z)||p(x,z))").unwrap();
        assert_eq!(classify(&obj), TractabilityClass::BinaryLikelihoodFree);
        assert!(matches!(
            compile(&obj, TractabilityClass::UnaryLikelihoodFree),
            Err(CompileError::AtomOutsideClass { .. })
        ));
        assert!(compile(&obj, TractabilityClass::BinaryLikelihoodFree).is_ok());
    }

    #[test]
    fn equivalence_reflexive_and_distinguishes_informations() {
        let a = parse_objective("1*I_q").unwrap();
        let b = parse_objective("1*I_p").unwrap();
        assert!(equivalent(&a, &a));
        assert!(!equivalent(&a, &b));
    }

    #[test]
    fn elbo_two_forms_equivalent() {
        let kl_form = parse_objective("KL(q(x,z)||p(x,z))").unwrap();
        let rec_form =
            parse_objective("-1*E_q[log p(x|z)] + E_q[log q(z|x)] - E_q[log p(z)]").unwrap();
        assert!(equivalent(&kl_form, &rec_form));
    }

    #[test]
    fn compile_outputs_verify_exactly() {
        let obj = parse_objective("2*I_q + 1*KL(q(x|z)||p(x|z)) + 3*KL(q(z)||p(z))").unwrap();
        let d = compile(&obj, TractabilityClass::UnaryLikelihoodFree).unwrap();
        // rebuild T·c + P·w and compare with the encoding
        let t = builtin_matrix(BuiltinMatrix::TUlf);
        let p = builtin_matrix(BuiltinMatrix::P);
        let mut acc = vec![rat_int(0); 20];
        for (label, c) in &d.tractable_coeffs {
            let col_idx = TractableTerm::columns(TractabilityClass::UnaryLikelihoodFree)
                .iter()
                .position(|l| l == label)
                .unwrap();
            for (i, a) in acc.iter_mut().enumerate() {
                *a += t.get(i, col_idx) * c;
            }
        }
        for (j, w) in d.null_witness.iter().enumerate() {
            for (i, a) in acc.iter_mut().enumerate() {
                *a += p.get(i, j) * w;
            }
        }
        assert_eq!(acc, encode_kl(&obj).coords());
    }

    #[test]
    fn class_monotonicity() {
        // classify never claims a smaller class than any class compile
        // succeeds in
        for text in [
            "1*I_q",
            "1*I_p + KL(p(z|x)||q(z|x))",
            "KL(q(x,z)||p(x,z))",
            "1*I_q + 1*I_p",
            "E_q[log q(x|z)]",
        ] {
            let obj = parse_objective(text).unwrap();
            let cls = classify(&obj);
            for target in [
                TractabilityClass::LikelihoodBased,
                TractabilityClass::UnaryLikelihoodFree,
                TractabilityClass::BinaryLikelihoodFree,
            ] {
                let ok = compile(&obj, target).is_ok();
                assert_eq!(ok, cls <= target, "{text} vs {target}");
            }
        }
    }
}
