use std::fmt;

use num::Zero;

use super::basis::{BasisTerm, DistRef, Family, Signature};
use crate::term_algebra::{format_rational, Rational, TermVector};

/// Number of coefficient slots in a KL Lagrangian objective: the two
/// mutual informations plus the ten ordered KL divergences.
pub const KL_EXPRESSION_COUNT: usize = 12;

/// One of the twelve KL Lagrangian expressions, in the frozen column order
/// of the coefficient matrix: `I_q`, `I_p`, then the ten KL divergences
/// paired (p‖q)/(q‖p) per signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KlExpression {
    InfoQ,
    InfoP,
    /// `D_KL(first(sig) ‖ other(sig))`; conditionals carry the expectation
    /// under the joint of the first argument's family.
    Kl {
        leading: Family,
        signature: Signature,
    },
}

impl KlExpression {
    pub const ALL: [KlExpression; KL_EXPRESSION_COUNT] = [
        KlExpression::InfoQ,
        KlExpression::InfoP,
        KlExpression::kl(Family::P, Signature::Joint),
        KlExpression::kl(Family::Q, Signature::Joint),
        KlExpression::kl(Family::P, Signature::MargX),
        KlExpression::kl(Family::Q, Signature::MargX),
        KlExpression::kl(Family::P, Signature::MargZ),
        KlExpression::kl(Family::Q, Signature::MargZ),
        KlExpression::kl(Family::P, Signature::CondZGivenX),
        KlExpression::kl(Family::Q, Signature::CondZGivenX),
        KlExpression::kl(Family::P, Signature::CondXGivenZ),
        KlExpression::kl(Family::Q, Signature::CondXGivenZ),
    ];

    pub const fn kl(leading: Family, signature: Signature) -> Self {
        KlExpression::Kl { leading, signature }
    }

    pub fn slot(self) -> usize {
        Self::ALL
            .iter()
            .position(|e| *e == self)
            .expect("expression is in the frozen table")
    }

    /// Exact expansion into basis coordinates.  Mutual informations use the
    /// conditional-minus-marginal form (the representation the coefficient
    /// matrix is written in); each KL expands to
    /// `E_lead[log lead] − E_lead[log other]`.
    pub fn encoding(self) -> TermVector {
        let mut v = TermVector::zero();
        let one = Rational::from_integer(1.into());
        match self {
            KlExpression::InfoQ => {
                let zx = BasisTerm::new(Family::Q, DistRef::new(Family::Q, Signature::CondZGivenX));
                let z = BasisTerm::new(Family::Q, DistRef::new(Family::Q, Signature::MargZ));
                v.add_at(zx.index(), &one);
                v.add_at(z.index(), &(-&one));
            }
            KlExpression::InfoP => {
                let zx = BasisTerm::new(Family::P, DistRef::new(Family::P, Signature::CondZGivenX));
                let z = BasisTerm::new(Family::P, DistRef::new(Family::P, Signature::MargZ));
                v.add_at(zx.index(), &one);
                v.add_at(z.index(), &(-&one));
            }
            KlExpression::Kl { leading, signature } => {
                let lead = BasisTerm::new(leading, DistRef::new(leading, signature));
                let other = BasisTerm::new(leading, DistRef::new(leading.other(), signature));
                v.add_at(lead.index(), &one);
                v.add_at(other.index(), &(-&one));
            }
        }
        v
    }
}

impl fmt::Display for KlExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KlExpression::InfoQ => write!(f, "I_q"),
            KlExpression::InfoP => write!(f, "I_p"),
            KlExpression::Kl { leading, signature } => {
                let a = DistRef::new(*leading, *signature);
                let b = DistRef::new(leading.other(), *signature);
                write!(f, "KL({}||{})", a, b)
            }
        }
    }
}

/// Coefficients over the twelve KL Lagrangian expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KlLagrangianCoeffs {
    slots: Vec<Rational>,
}

impl KlLagrangianCoeffs {
    pub fn zero() -> Self {
        Self {
            slots: vec![Rational::zero(); KL_EXPRESSION_COUNT],
        }
    }

    pub fn get(&self, e: KlExpression) -> &Rational {
        &self.slots[e.slot()]
    }

    pub fn add(&mut self, e: KlExpression, c: &Rational) {
        self.slots[e.slot()] += c;
    }

    pub fn info_q(&self) -> &Rational {
        self.get(KlExpression::InfoQ)
    }

    pub fn info_p(&self) -> &Rational {
        self.get(KlExpression::InfoP)
    }

    /// Coefficients stacked in the frozen expression order.
    pub fn stacked(&self) -> &[Rational] {
        &self.slots
    }

    pub fn is_zero(&self) -> bool {
        self.slots.iter().all(Rational::is_zero)
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (KlExpression, &Rational)> {
        KlExpression::ALL
            .iter()
            .zip(&self.slots)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (*e, c))
    }
}

/// Divergences that stay opaque to the term algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Js,
    Mmd,
    W,
    F,
}

impl AtomKind {
    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Js => "JS",
            AtomKind::Mmd => "MMD",
            AtomKind::W => "W",
            AtomKind::F => "F",
        }
    }
}

/// A weighted opaque divergence between two same-signature distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceAtom {
    pub kind: AtomKind,
    pub left: DistRef,
    pub right: DistRef,
    pub weight: Rational,
}

impl DivergenceAtom {
    /// Constructor enforcing the shared-signature invariant.
    pub fn new(kind: AtomKind, left: DistRef, right: DistRef, weight: Rational) -> Option<Self> {
        (left.signature == right.signature).then_some(Self {
            kind,
            left,
            right,
            weight,
        })
    }

    fn sort_key(&self) -> (AtomKind, Signature, Family, Family) {
        (
            self.kind,
            self.left.signature,
            self.left.family,
            self.right.family,
        )
    }
}

impl fmt::Display for DivergenceAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}||{})", self.kind.name(), self.left, self.right)
    }
}

/// A parsed objective: coefficients over the KL Lagrangian span, directly
/// written basis terms, and opaque divergence atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangianObjective {
    pub kl_part: KlLagrangianCoeffs,
    /// Coefficients on `E_*[log ·]` terms written directly in the source
    /// text (tractable forms are expressed this way).
    pub log_terms: TermVector,
    pub atoms: Vec<DivergenceAtom>,
    pub label: String,
}

impl LagrangianObjective {
    pub fn zero() -> Self {
        Self {
            kl_part: KlLagrangianCoeffs::zero(),
            log_terms: TermVector::zero(),
            atoms: Vec::new(),
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn add_expression(&mut self, e: KlExpression, c: &Rational) {
        self.kl_part.add(e, c);
    }

    pub fn add_log_term(&mut self, t: BasisTerm, c: &Rational) {
        self.log_terms.add_at(t.index(), c);
    }

    /// Adds an atom, merging with an existing one of the same shape.
    /// Self-divergences (`D(d‖d)`, identically zero) are dropped.
    pub fn add_atom(&mut self, atom: DivergenceAtom) {
        if atom.left == atom.right || atom.weight.is_zero() {
            return;
        }
        if let Some(existing) = self
            .atoms
            .iter_mut()
            .find(|a| a.kind == atom.kind && a.left == atom.left && a.right == atom.right)
        {
            existing.weight += &atom.weight;
            self.atoms.retain(|a| !a.weight.is_zero());
        } else {
            self.atoms.push(atom);
        }
        self.atoms.sort_by_key(DivergenceAtom::sort_key);
    }

    /// `self + c · other` (atoms merged); used by linearity tests and the
    /// catalog constructors.
    pub fn linear_combine(&self, c: &Rational, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, w) in other.kl_part.iter_nonzero() {
            out.kl_part.add(e, &(c * w));
        }
        out.log_terms = out.log_terms.add(&other.log_terms.scale(c));
        for a in &other.atoms {
            out.add_atom(DivergenceAtom {
                weight: c * &a.weight,
                ..a.clone()
            });
        }
        out
    }

    /// Atoms as a canonical multiset (sorted, weights aggregated).
    pub fn atom_multiset(&self) -> Vec<DivergenceAtom> {
        self.atoms.clone()
    }
}

/// Formats an objective in the grammar the parser accepts.
impl fmt::Display for LagrangianObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(Rational, String)> = Vec::new();
        for (e, c) in self.kl_part.iter_nonzero() {
            parts.push((c.clone(), e.to_string()));
        }
        for t in BasisTerm::all() {
            let c = self.log_terms.get(t.index());
            if !c.is_zero() {
                parts.push((c.clone(), t.to_string()));
            }
        }
        for a in &self.atoms {
            parts.push((a.weight.clone(), format!("{}({}||{})", a.kind.name(), a.left, a.right)));
        }
        if parts.is_empty() {
            return write!(f, "0*I_q");
        }
        for (i, (c, name)) in parts.iter().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", format_rational(&mag), name)?;
        }
        Ok(())
    }
}
