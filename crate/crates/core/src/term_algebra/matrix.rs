use num::bigint::BigInt;
use num::{Integer, One, Zero};
use thiserror::Error;

use super::rational::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
}

/// Dense matrix of exact rationals, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a matrix from integer rows; handy for frozen constant tables.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self::from_fn(nr, nc, |r, c| Rational::from_integer(BigInt::from(rows[r][c])))
    }

    /// Column vectors as a matrix (each inner vec is one column).
    pub fn from_cols(cols: Vec<Vec<Rational>>, rows: usize) -> Self {
        let nc = cols.len();
        assert!(cols.iter().all(|c| c.len() == rows), "ragged columns");
        Self::from_fn(rows, nc, |r, c| cols[c][r].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.rows != other.rows {
            return Err(AlgebraError::DimMismatch {
                context: "hcat row counts",
                left: self.rows,
                right: other.rows,
            });
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        }))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.cols != other.rows {
            return Err(AlgebraError::DimMismatch {
                context: "matrix product inner dims",
                left: self.cols,
                right: other.rows,
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = Rational::zero();
            for k in 0..self.cols {
                if !self.get(r, k).is_zero() && !other.get(k, c).is_zero() {
                    acc += self.get(r, k) * other.get(k, c);
                }
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, AlgebraError> {
        if self.cols != v.len() {
            return Err(AlgebraError::DimMismatch {
                context: "matrix-vector inner dims",
                left: self.cols,
                right: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    if !self.get(r, k).is_zero() && !v[k].is_zero() {
                        acc += self.get(r, k) * &v[k];
                    }
                }
                acc
            })
            .collect())
    }

    pub fn scale_assign(&mut self, s: &Rational) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    /// Exact rank via fraction-free Bareiss elimination.
    ///
    /// Row denominators are cleared first so the sweep runs in BigInt; the
    /// one-step division by the previous pivot is exact by Sylvester's
    /// identity (asserted in debug builds).
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut m: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let mut lcm = BigInt::one();
                for c in 0..self.cols {
                    lcm = lcm.lcm(self.get(r, c).denom());
                }
                (0..self.cols)
                    .map(|c| {
                        let q = self.get(r, c);
                        q.numer() * (&lcm / q.denom())
                    })
                    .collect()
            })
            .collect();
        let mut prev = BigInt::one();
        let mut piv = 0usize;
        for c in 0..self.cols {
            let Some(sel) = (piv..self.rows).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(piv, sel);
            for i in piv + 1..self.rows {
                for j in c + 1..self.cols {
                    let t = &m[piv][c] * &m[i][j] - &m[i][c] * &m[piv][j];
                    let (q, rem) = t.div_rem(&prev);
                    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                    m[i][j] = q;
                }
                m[i][c] = BigInt::zero();
            }
            prev = m[piv][c].clone();
            piv += 1;
            if piv == self.rows {
                break;
            }
        }
        piv
    }

    /// Reduced row echelon form with leftmost-pivot tie-breaking.
    /// Returns the reduced matrix and the pivot columns in order.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut piv = 0usize;
        for c in 0..m.cols {
            let Some(sel) = (piv..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                continue;
            };
            m.swap_rows(piv, sel);
            let inv = m.get(piv, c).clone();
            for j in c..m.cols {
                let v = m.get(piv, j) / &inv;
                m.set(piv, j, v);
            }
            for r in 0..m.rows {
                if r != piv && !m.get(r, c).is_zero() {
                    let f = m.get(r, c).clone();
                    for j in c..m.cols {
                        let v = m.get(r, j) - &f * m.get(piv, j);
                        m.set(r, j, v);
                    }
                }
            }
            pivots.push(c);
            piv += 1;
            if piv == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let cols = self.cols;
            self.data.swap(a * cols + c, b * cols + c);
        }
    }

    /// Basis of `{v : self · v = 0}` as matrix columns.
    ///
    /// Free variables are assigned the unit value in column order, so the
    /// basis is canonical. Column count equals `cols − rank`.
    pub fn nullspace(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![Rational::zero(); self.cols];
            v[fc] = Rational::one();
            for (pi, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(pi, fc).clone();
            }
            basis.push(v);
        }
        Self::from_cols(basis, self.cols)
    }

    /// Basis of `col(self) ∩ col(other)`.
    ///
    /// Computed through the nullspace of `[self other]`: for each kernel
    /// vector `(u, v)` the combination `self · u` lies in both column
    /// spaces. The resulting columns are pruned to an independent subset
    /// (the inputs need not have independent columns).
    pub fn subspace_intersect(&self, other: &Self) -> Result<Self, AlgebraError> {
        let joint = self.hcat(other)?;
        let ns = joint.nullspace();
        if ns.cols() == 0 {
            return Ok(Self::zeros(self.rows, 0));
        }
        let u_part = Self::from_fn(self.cols, ns.cols(), |r, c| ns.get(r, c).clone());
        let cand = self.mul(&u_part)?;
        let (_, pivots) = cand.rref();
        let cols = pivots.iter().map(|&c| cand.column(c)).collect();
        Ok(Self::from_cols(cols, self.rows))
    }

    /// Exact membership certificate: coefficients `c` with `self · c = v`,
    /// or `None` when `v` is outside the column space.
    ///
    /// The certificate is the canonical RREF solution (leftmost pivots,
    /// free variables zero), so repeated calls are bit-identical.
    pub fn member_of(&self, v: &[Rational]) -> Result<Option<Vec<Rational>>, AlgebraError> {
        if v.len() != self.rows {
            return Err(AlgebraError::DimMismatch {
                context: "member_of vector length",
                left: v.len(),
                right: self.rows,
            });
        }
        let aug = self.hcat(&Self::from_cols(vec![v.to_vec()], self.rows))?;
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None);
        }
        let mut sol = vec![Rational::zero(); self.cols];
        for (pi, &pc) in pivots.iter().enumerate() {
            sol[pc] = r.get(pi, self.cols).clone();
        }
        Ok(Some(sol))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    /// True when the column spaces coincide (mutual membership).
    pub fn col_space_eq(&self, other: &Self) -> Result<bool, AlgebraError> {
        if self.rows != other.rows {
            return Err(AlgebraError::DimMismatch {
                context: "col_space_eq row counts",
                left: self.rows,
                right: other.rows,
            });
        }
        for c in 0..other.cols {
            if self.member_of(&other.column(c))?.is_none() {
                return Ok(false);
            }
        }
        for c in 0..self.cols {
            if other.member_of(&self.column(c))?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_algebra::rational::{rat, rat_int};
    use proptest::prelude::*;

    fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-4i64..5, r * c).prop_map(move |vals| {
                RationalMatrix::from_fn(r, c, |i, j| rat_int(vals[i * c + j]))
            })
        })
    }

    #[test]
    fn rank_identity_and_zero() {
        assert_eq!(RationalMatrix::identity(3).rank(), 3);
        assert_eq!(RationalMatrix::zeros(20, 10).rank(), 0);
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        let ns = RationalMatrix::identity(4).nullspace();
        assert_eq!(ns.cols(), 0);
        assert_eq!(ns.rows(), 4);
    }

    #[test]
    fn nullspace_of_single_equation() {
        // [1 -1] v = 0 forces v proportional to (1, 1)
        let m = RationalMatrix::from_i64_rows(&[&[1, -1]]);
        let ns = m.nullspace();
        assert_eq!(ns.cols(), 1);
        assert_eq!(ns.get(0, 0), ns.get(1, 0));
        assert!(!ns.get(0, 0).is_zero());
    }

    #[test]
    fn intersect_self_and_disjoint_axes() {
        let id3 = RationalMatrix::identity(3);
        let inter = id3.subspace_intersect(&id3).unwrap();
        assert_eq!(inter.rank(), 3);

        let a = RationalMatrix::from_i64_rows(&[&[1], &[0]]);
        let b = RationalMatrix::from_i64_rows(&[&[0], &[1]]);
        let inter = a.subspace_intersect(&b).unwrap();
        assert_eq!(inter.cols(), 0);
    }

    #[test]
    fn intersect_rejects_row_mismatch() {
        let a = RationalMatrix::identity(3);
        let b = RationalMatrix::identity(2);
        assert!(matches!(
            a.subspace_intersect(&b),
            Err(AlgebraError::DimMismatch { .. })
        ));
    }

    #[test]
    fn member_of_zero_vector_and_basis_column() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 2], &[0, 1], &[3, 0]]);
        let zero = vec![rat_int(0), rat_int(0), rat_int(0)];
        let c = m.member_of(&zero).unwrap().unwrap();
        assert!(c.iter().all(|x| x.is_zero()));

        let col1 = m.column(1);
        let c = m.member_of(&col1).unwrap().unwrap();
        assert_eq!(c, vec![rat_int(0), rat_int(1)]);
    }

    #[test]
    fn member_of_detects_outside_vectors() {
        let m = RationalMatrix::from_i64_rows(&[&[1], &[1]]);
        assert!(m.member_of(&[rat_int(1), rat_int(2)]).unwrap().is_none());
        assert!(m.member_of(&[rat(1, 2), rat(1, 2)]).unwrap().is_some());
    }

    #[test]
    fn rref_solution_is_exact() {
        let m = RationalMatrix::from_i64_rows(&[&[2, 1], &[1, 3]]);
        let v = vec![rat_int(5), rat_int(10)];
        let c = m.member_of(&v).unwrap().unwrap();
        assert_eq!(m.mul_vec(&c).unwrap(), v);
        assert_eq!(c, vec![rat_int(1), rat_int(3)]);
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(m in small_matrix()) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn rank_matches_rref_pivot_count(m in small_matrix()) {
            let (_, pivots) = m.rref();
            prop_assert_eq!(m.rank(), pivots.len());
        }

        #[test]
        fn nullspace_columns_annihilate(m in small_matrix()) {
            let ns = m.nullspace();
            prop_assert_eq!(ns.cols() + m.rank(), m.cols());
            if ns.cols() > 0 {
                let prod = m.mul(&ns).unwrap();
                prop_assert!(prod.is_zero());
            }
        }

        #[test]
        fn intersection_symmetric_up_to_col_space(
            pair in (1usize..5, 1usize..4, 1usize..4).prop_flat_map(|(r, ca, cb)| {
                (proptest::collection::vec(-3i64..4, r * ca),
                 proptest::collection::vec(-3i64..4, r * cb))
                    .prop_map(move |(va, vb)| {
                        (RationalMatrix::from_fn(r, ca, |i, j| rat_int(va[i * ca + j])),
                         RationalMatrix::from_fn(r, cb, |i, j| rat_int(vb[i * cb + j])))
                    })
            })
        ) {
            let (a, b) = pair;
            let ab = a.subspace_intersect(&b).unwrap();
            let ba = b.subspace_intersect(&a).unwrap();
            prop_assert!(ab.col_space_eq(&ba).unwrap());
            // every intersection column is in both column spaces
            for c in 0..ab.cols() {
                prop_assert!(a.member_of(&ab.column(c)).unwrap().is_some());
                prop_assert!(b.member_of(&ab.column(c)).unwrap().is_some());
            }
        }

        #[test]
        fn member_certificates_reproduce_vector(m in small_matrix()) {
            // combine columns with fixed weights; certificate must rebuild it
            let weights: Vec<Rational> =
                (0..m.cols()).map(|i| rat(i as i64 + 1, 2)).collect();
            let v = m.mul_vec(&weights).unwrap();
            let c = m.member_of(&v).unwrap().unwrap();
            prop_assert_eq!(m.mul_vec(&c).unwrap(), v);
        }
    }
}
