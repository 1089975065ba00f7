//! Compressed sparse row complex matrices acting on a Fock basis.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Square complex matrix in CSR form. Columns within a row are sorted and
/// unique; exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Cx<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal((0..dim).map(|_| Cx::new(T::one(), T::zero())).collect())
    }

    pub fn from_diagonal(diag: Vec<Cx<T>>) -> Self {
        Self::from_triplets(diag.len(), diag.into_iter().enumerate().map(|(i, v)| (i, i, v)))
            .expect("diagonal indices are in range")
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Cx<T>)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, Cx<T>)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfBounds {
                    what: "operator entries",
                    index: r.max(c),
                    len: dim,
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut values: Vec<Cx<T>> = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            values.push(v);
        }
        let zero = Cx::new(T::zero(), T::zero());
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(values) {
            if v != zero {
                row_ptr[r + 1] += 1;
                kept_cols.push(c);
                kept_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            dim,
            row_ptr,
            cols: kept_cols,
            values: kept_vals,
        })
    }

    pub fn from_dense(m: &DMatrix<Cx<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .map(|(r, c)| (r, c, m[(r, c)])),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Cx<T>)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k])))
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Cx<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Cx<T> {
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => Cx::new(T::zero(), T::zero()),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<Cx<T>> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Real parts of the diagonal, failing if any off-diagonal entry is stored.
    pub fn real_diagonal(&self) -> Result<Vec<T>> {
        if !self.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok(self.diagonal().into_iter().map(|v| v.re).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
            .expect("transpose keeps indices in range")
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (r, c, v * s))).expect("indices unchanged")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut triplets = Vec::new();
        for (r, k, a) in self.iter() {
            for (c, b) in other.row(k) {
                triplets.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.add(&ba.scale(Cx::new(-T::one(), T::zero())))
    }

    /// `max |A - A^dagger|` over all entries.
    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for (r, c, v) in self.iter() {
            let d = (v - self.get(c, r).conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.modulus()))
    }

    pub fn apply(&self, v: &DVector<Cx<T>>) -> Result<DVector<Cx<T>>> {
        self.check_dim(v.len())?;
        Ok(DVector::from_fn(self.dim, |r, _| {
            self.row(r)
                .fold(Cx::new(T::zero(), T::zero()), |acc, (c, a)| acc + a * v[c])
        }))
    }

    pub fn apply_slice(&self, v: &[Cx<T>], out: &mut [Cx<T>]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self
                .row(r)
                .fold(Cx::new(T::zero(), T::zero()), |acc, (c, a)| acc + a * v[c]);
        }
    }

    /// Dense product `self * m`.
    pub fn mul_dense(&self, m: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        let mut out = DMatrix::zeros(self.dim, m.ncols());
        for (r, k, a) in self.iter() {
            for c in 0..m.ncols() {
                out[(r, c)] += a * m[(k, c)];
            }
        }
        out
    }

    /// Dense product `m * self`.
    pub fn dense_mul(&self, m: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        let mut out = DMatrix::zeros(m.nrows(), self.dim);
        for (k, c, a) in self.iter() {
            for r in 0..m.nrows() {
                out[(r, c)] += m[(r, k)] * a;
            }
        }
        out
    }

    /// `[self, m]` with `m` dense.
    pub fn commutator_dense(&self, m: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        self.mul_dense(m) - self.dense_mul(m)
    }

    pub fn to_dense(&self) -> DMatrix<Cx<T>> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            out[(r, c)] = v;
        }
        out
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let op = SparseOperator::from_triplets(
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(-1.0, 0.0)),
                (1, 0, c(2.0, 0.0)),
                (1, 0, c(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(1, 0), c(2.5, 0.0));
        assert_eq!(op.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseOperator::<f64>::from_triplets(2, vec![(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn products_match_dense() {
        let a = SparseOperator::from_triplets(3, vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-1.0, 0.5)), (1, 1, c(0.0, 3.0))])
            .unwrap();
        let b = SparseOperator::from_triplets(3, vec![(1, 2, c(2.0, 0.0)), (0, 0, c(1.0, -1.0)), (2, 1, c(0.5, 0.5))])
            .unwrap();
        let dense = a.to_dense() * b.to_dense();
        let diff = (a.mul(&b).unwrap().to_dense() - &dense).camax();
        assert!(diff < 1e-15);
        let m = b.to_dense();
        assert!((a.mul_dense(&m) - a.to_dense() * &m).camax() < 1e-15);
        assert!((a.dense_mul(&m) - &m * a.to_dense()).camax() < 1e-15);
        assert!((a.adjoint().to_dense() - a.to_dense().adjoint()).camax() == 0.0);
    }

    #[test]
    fn hermiticity_and_diagonal_checks() {
        let h = SparseOperator::from_triplets(2, vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]).unwrap();
        assert_eq!(h.hermiticity_deviation(), 0.0);
        assert!(!h.is_diagonal());
        assert!(matches!(h.real_diagonal(), Err(Error::NotDiagonal)));
        let d = SparseOperator::from_diagonal(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(d.nnz(), 1);
        assert_eq!(d.real_diagonal().unwrap(), vec![1.0, 0.0]);
    }
}
