use std::fmt;

use serde::{Deserialize, Serialize};

/// Which of the two model factorizations a distribution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    P,
    Q,
}

impl Family {
    pub fn other(self) -> Self {
        match self {
            Family::P => Family::Q,
            Family::Q => Family::P,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Family::P => 'p',
            Family::Q => 'q',
        }
    }

    fn block(self) -> usize {
        match self {
            Family::P => 0,
            Family::Q => 1,
        }
    }
}

/// Argument signature of a distribution reference.
///
/// The ordering (joint, x|z, z|x, marginal-x, marginal-z) is frozen: it is
/// the atom order of the 20-term basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signature {
    Joint,
    CondXGivenZ,
    CondZGivenX,
    MargX,
    MargZ,
}

impl Signature {
    pub const ALL: [Signature; 5] = [
        Signature::Joint,
        Signature::CondXGivenZ,
        Signature::CondZGivenX,
        Signature::MargX,
        Signature::MargZ,
    ];

    fn index(self) -> usize {
        match self {
            Signature::Joint => 0,
            Signature::CondXGivenZ => 1,
            Signature::CondZGivenX => 2,
            Signature::MargX => 3,
            Signature::MargZ => 4,
        }
    }

    fn args(self) -> &'static str {
        match self {
            Signature::Joint => "x,z",
            Signature::CondXGivenZ => "x|z",
            Signature::CondZGivenX => "z|x",
            Signature::MargX => "x",
            Signature::MargZ => "z",
        }
    }
}

/// One of the ten distribution references `p(x,z) … q(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DistRef {
    pub family: Family,
    pub signature: Signature,
}

impl DistRef {
    pub const fn new(family: Family, signature: Signature) -> Self {
        Self { family, signature }
    }

    pub fn all() -> impl Iterator<Item = DistRef> {
        [Family::P, Family::Q].into_iter().flat_map(|family| {
            Signature::ALL
                .into_iter()
                .map(move |signature| DistRef { family, signature })
        })
    }
}

impl fmt::Display for DistRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family.letter(), self.signature.args())
    }
}

/// One of the 20 basis terms: an outer expectation joint and a
/// log-probability atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisTerm {
    pub outer: Family,
    pub atom: DistRef,
}

impl BasisTerm {
    pub const fn new(outer: Family, atom: DistRef) -> Self {
        Self { outer, atom }
    }

    /// Position in the canonical basis ordering.
    pub fn index(self) -> usize {
        self.outer.block() * 10 + self.atom.family.block() * 5 + self.atom.signature.index()
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 20);
        let outer = if i < 10 { Family::P } else { Family::Q };
        let fam = if (i % 10) < 5 { Family::P } else { Family::Q };
        let sig = Signature::ALL[i % 5];
        Self::new(outer, DistRef::new(fam, sig))
    }

    pub fn all() -> impl Iterator<Item = BasisTerm> {
        (0..20).map(Self::from_index)
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E_{}[log {}]", self.outer.letter(), self.atom)
    }
}
