use num::Zero;

use super::matrix::RationalMatrix;
use super::rational::Rational;

/// Dimension of the expectation-term basis: two outer joints times ten
/// log-probability atoms.
pub const BASIS_DIM: usize = 20;

/// Exact coordinate vector over the fixed 20-term expectation basis.
///
/// Index layout (frozen; all constant matrices are written against it):
///
/// | block | outer | atoms (in order)                                      |
/// |-------|-------|-------------------------------------------------------|
/// | 0..5  | E_p   | log p(x,z), log p(x|z), log p(z|x), log p(x), log p(z) |
/// | 5..10 | E_p   | log q(x,z), log q(x|z), log q(z|x), log q(x), log q(z) |
/// | 10..15| E_q   | log p(x,z), log p(x|z), log p(z|x), log p(x), log p(z) |
/// | 15..20| E_q   | log q(x,z), log q(x|z), log q(z|x), log q(x), log q(z) |
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermVector {
    coords: Vec<Rational>,
}

impl TermVector {
    pub fn zero() -> Self {
        Self {
            coords: vec![Rational::zero(); BASIS_DIM],
        }
    }

    pub fn from_coords(coords: Vec<Rational>) -> Self {
        assert_eq!(coords.len(), BASIS_DIM, "term vector must have 20 coords");
        Self { coords }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    pub fn add_at(&mut self, i: usize, v: &Rational) {
        self.coords[i] += v;
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a * s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Rational::is_zero)
    }

    /// The vector as a 20×1 matrix column.
    pub fn as_column(&self) -> RationalMatrix {
        RationalMatrix::from_cols(vec![self.coords.clone()], BASIS_DIM)
    }

    pub fn from_column(m: &RationalMatrix, col: usize) -> Self {
        assert_eq!(m.rows(), BASIS_DIM);
        Self::from_coords(m.column(col))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_algebra::rational::rat_int;

    #[test]
    fn linear_ops() {
        let mut a = TermVector::zero();
        a.add_at(3, &rat_int(2));
        let b = a.scale(&rat_int(3));
        assert_eq!(b.get(3), &rat_int(6));
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.add(&a).get(3), &rat_int(4));
    }

    #[test]
    #[should_panic(expected = "20 coords")]
    fn wrong_length_rejected() {
        TermVector::from_coords(vec![rat_int(1); 19]);
    }
}
