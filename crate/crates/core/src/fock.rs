//! Truncated multimode Fock space, optionally tensored with a finite matter
//! factor, and the state types living on it.
//!
//! Basis order (defines every matrix index in the crate):
//!
//! * Photon occupation vectors are sorted by total photon number, ascending.
//!   Within one total they are sorted lexicographically *descending*, so for
//!   two cells and `max_total = 2` the order is `00, 10, 01, 20, 11, 02`.
//! * The joint index is matter-major: `index = matter * photon_dim + photon`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::ModeLattice;
use crate::scalar::{cre, Cx, Real};
use crate::sparse::SparseOperator;

/// Default upper bound on the joint basis dimension.
pub const DEFAULT_DIM_LIMIT: usize = 200_000;

#[derive(Debug, Clone)]
pub struct FockBasis<T> {
    lattice: ModeLattice<T>,
    max_total: u32,
    matter_dim: usize,
    occupations: Vec<u32>,
    lookup: HashMap<Vec<u32>, usize>,
}

/// Serializable summary of a basis, used in output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDescription {
    pub dims: usize,
    pub cells_per_axis: usize,
    pub cell_size: f64,
    pub max_total: u32,
    pub matter_dim: usize,
    pub dim: usize,
    pub order: String,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn push_compositions(total: u32, cells: usize, prefix: &mut Vec<u32>, out: &mut Vec<u32>) {
    if cells == 1 {
        prefix.push(total);
        out.extend_from_slice(prefix);
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        push_compositions(total - first, cells - 1, prefix, out);
        prefix.pop();
    }
}

impl<T: Real> FockBasis<T> {
    pub fn new(lattice: ModeLattice<T>, max_total: u32, matter_dim: usize) -> Result<Self> {
        Self::with_limit(lattice, max_total, matter_dim, DEFAULT_DIM_LIMIT)
    }

    pub fn with_limit(lattice: ModeLattice<T>, max_total: u32, matter_dim: usize, limit: usize) -> Result<Self> {
        if matter_dim == 0 {
            return Err(invalid("matter_dim", "must be at least 1"));
        }
        let cells = lattice.cell_count();
        let photon_dim = binomial(cells as u128 + max_total as u128, max_total as u128);
        let dim = photon_dim.and_then(|p| p.checked_mul(matter_dim as u128));
        match dim {
            Some(d) if d <= limit as u128 => {}
            Some(d) => return Err(Error::BasisTooLarge { dim: d, limit }),
            None => return Err(Error::BasisTooLarge { dim: u128::MAX, limit }),
        }

        let mut occupations = Vec::new();
        let mut prefix = Vec::with_capacity(cells);
        for total in 0..=max_total {
            push_compositions(total, cells, &mut prefix, &mut occupations);
        }
        let lookup = occupations
            .chunks(cells)
            .enumerate()
            .map(|(i, occ)| (occ.to_vec(), i))
            .collect();
        Ok(Self {
            lattice,
            max_total,
            matter_dim,
            occupations,
            lookup,
        })
    }

    pub fn lattice(&self) -> &ModeLattice<T> {
        &self.lattice
    }

    pub fn max_total(&self) -> u32 {
        self.max_total
    }

    pub fn matter_dim(&self) -> usize {
        self.matter_dim
    }

    pub fn cells(&self) -> usize {
        self.lattice.cell_count()
    }

    /// Number of photon occupation vectors.
    pub fn photon_dim(&self) -> usize {
        self.occupations.len() / self.cells()
    }

    /// Joint dimension `matter_dim * photon_dim`.
    pub fn dim(&self) -> usize {
        self.matter_dim * self.photon_dim()
    }

    pub fn occupation(&self, photon_index: usize) -> &[u32] {
        let c = self.cells();
        &self.occupations[photon_index * c..(photon_index + 1) * c]
    }

    pub fn photon_index(&self, occupation: &[u32]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    /// Joint index of `|matter> ⊗ |occupation>`.
    pub fn index(&self, matter: usize, occupation: &[u32]) -> Result<usize> {
        if matter >= self.matter_dim {
            return Err(Error::IndexOutOfBounds {
                what: "matter factor",
                index: matter,
                len: self.matter_dim,
            });
        }
        if occupation.len() != self.cells() {
            return Err(Error::DimensionMismatch {
                expected: self.cells(),
                found: occupation.len(),
            });
        }
        let p = self.photon_index(occupation).ok_or_else(|| Error::NotInBasis {
            occupation: occupation.to_vec(),
        })?;
        Ok(matter * self.photon_dim() + p)
    }

    /// Splits a joint index into `(matter, photon)`.
    pub fn split(&self, index: usize) -> (usize, usize) {
        let p = self.photon_dim();
        (index / p, index % p)
    }

    pub fn total_photons(&self, photon_index: usize) -> u32 {
        self.occupation(photon_index).iter().sum()
    }

    pub fn describe(&self) -> BasisDescription {
        BasisDescription {
            dims: self.lattice.dims(),
            cells_per_axis: self.lattice.cells_per_axis(),
            cell_size: self.lattice.cell_size().as_f64(),
            max_total: self.max_total,
            matter_dim: self.matter_dim,
            dim: self.dim(),
            order: "matter-major; photon occupations by total ascending, then lexicographically descending".into(),
        }
    }
}

/// Normalized pure state on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector<T: Real> {
    basis: Arc<FockBasis<T>>,
    amplitudes: DVector<Cx<T>>,
}

impl<T: Real> PartialEq for StateVector<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.amplitudes == other.amplitudes
    }
}

impl<T: Real> StateVector<T> {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(basis: Arc<FockBasis<T>>, amplitudes: DVector<Cx<T>>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        let mut s = Self { basis, amplitudes };
        s.normalize()?;
        Ok(s)
    }

    /// `|matter> ⊗ |occupation>`.
    pub fn basis_state(basis: Arc<FockBasis<T>>, matter: usize, occupation: &[u32]) -> Result<Self> {
        let i = basis.index(matter, occupation)?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[i] = Cx::new(T::one(), T::zero());
        Ok(Self { basis, amplitudes })
    }

    /// Superposition `sum_k c_k |matter_k> ⊗ |occupation_k>`, normalized.
    pub fn superposition(basis: Arc<FockBasis<T>>, terms: &[(usize, &[u32], Cx<T>)]) -> Result<Self> {
        let mut amplitudes = DVector::zeros(basis.dim());
        for (m, occ, c) in terms {
            let i = basis.index(*m, occ)?;
            amplitudes[i] += *c;
        }
        Self::from_amplitudes(basis, amplitudes)
    }

    /// Product state `matter ⊗ photons` where `photons` lives on the photon
    /// factor alone (`photon_dim` amplitudes).
    pub fn product(basis: Arc<FockBasis<T>>, matter: &[Cx<T>], photons: &[Cx<T>]) -> Result<Self> {
        if matter.len() != basis.matter_dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.matter_dim(),
                found: matter.len(),
            });
        }
        if photons.len() != basis.photon_dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.photon_dim(),
                found: photons.len(),
            });
        }
        let p = basis.photon_dim();
        let amplitudes = DVector::from_fn(basis.dim(), |i, _| matter[i / p] * photons[i % p]);
        Self::from_amplitudes(basis, amplitudes)
    }

    #[cfg(test)]
    pub(crate) fn from_normalized_unchecked(basis: Arc<FockBasis<T>>, amplitudes: DVector<Cx<T>>) -> Self {
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<FockBasis<T>> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Cx<T>> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Cx<T>> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }

    pub(crate) fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = T::one() / n;
        self.amplitudes.iter_mut().for_each(|a| *a = a.scale(inv));
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Cx<T> {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// `<psi|op|psi>`.
    pub fn expectation(&self, op: &SparseOperator<T>) -> Result<Cx<T>> {
        let applied = op.apply(&self.amplitudes)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(applied.iter())
            .fold(Cx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Mean occupation of every cell.
    pub fn cell_occupations(&self) -> Vec<T> {
        let b = &self.basis;
        let mut out = vec![T::zero(); b.cells()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            if w == T::zero() {
                continue;
            }
            let (_, p) = b.split(i);
            for (o, &n) in out.iter_mut().zip(b.occupation(p)) {
                *o += w * T::lit(n as f64);
            }
        }
        out
    }

    pub fn total_photons(&self) -> T {
        self.cell_occupations().into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Reduced state of the matter factor, `tr_photons |psi><psi|`.
    pub fn reduced_matter(&self) -> DMatrix<Cx<T>> {
        let m = self.basis.matter_dim();
        let p = self.basis.photon_dim();
        DMatrix::from_fn(m, m, |r, c| {
            (0..p).fold(Cx::new(T::zero(), T::zero()), |acc, k| {
                acc + self.amplitudes[r * p + k] * self.amplitudes[c * p + k].conj()
            })
        })
    }

    /// Weight of each matter branch.
    pub fn matter_weights(&self) -> Vec<T> {
        let p = self.basis.photon_dim();
        (0..self.basis.matter_dim())
            .map(|m| {
                self.amplitudes
                    .rows(m * p, p)
                    .iter()
                    .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            })
            .collect()
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            basis: self.basis.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Dense density operator on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Real> {
    basis: Arc<FockBasis<T>>,
    matrix: DMatrix<Cx<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(basis: Arc<FockBasis<T>>, matrix: DMatrix<Cx<T>>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &Arc<FockBasis<T>> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Cx<T>> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Cx<T> {
        self.matrix.trace()
    }

    /// `max |rho - rho^dagger|` entrywise.
    pub fn hermiticity_deviation(&self) -> T {
        hermiticity_deviation(&self.matrix)
    }

    pub fn purity(&self) -> T {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        min_eigenvalue(&self.matrix)
    }

    pub fn reduced_matter(&self) -> DMatrix<Cx<T>> {
        let m = self.basis.matter_dim();
        let p = self.basis.photon_dim();
        DMatrix::from_fn(m, m, |r, c| {
            (0..p).fold(Cx::new(T::zero(), T::zero()), |acc, k| {
                acc + self.matrix[(r * p + k, c * p + k)]
            })
        })
    }

    /// Checks trace, Hermiticity and positivity against the standard tolerances
    /// (`1e-9`, `1e-10`, `-1e-8`).
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        let trace_dev = (tr - cre(T::one())).modulus().as_f64();
        if trace_dev > 1e-9 {
            return Err(invalid("rho", format!("trace deviates from 1 by {trace_dev:e}")));
        }
        let herm = self.hermiticity_deviation().as_f64();
        if herm > 1e-10 {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let min = self.min_eigenvalue().as_f64();
        if min < -1e-8 {
            return Err(invalid("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

pub(crate) fn hermiticity_deviation<T: Real>(m: &DMatrix<Cx<T>>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for r in 0..n {
        for c in r..n {
            let d = (m[(r, c)] - m[(c, r)].conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub(crate) fn min_eigenvalue<T: Real>(m: &DMatrix<Cx<T>>) -> T {
    let half = T::lit(0.5);
    let herm = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| (m[(r, c)] + m[(c, r)].conj()).scale(half));
    herm.symmetric_eigenvalues()
        .iter()
        .fold(T::max_value().unwrap_or_else(T::one), |a, &b| a.min(b))
}

/// Trace distance `1/2 ||a - b||_1` between two Hermitian matrices.
pub fn trace_distance<T: Real>(a: &DMatrix<Cx<T>>, b: &DMatrix<Cx<T>>) -> T {
    let diff = a - b;
    let half = T::lit(0.5);
    let herm = DMatrix::from_fn(diff.nrows(), diff.ncols(), |r, c| {
        (diff[(r, c)] + diff[(c, r)].conj()).scale(half)
    });
    herm.symmetric_eigenvalues()
        .iter()
        .fold(T::zero(), |acc, e| acc + e.abs())
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(cells: usize, max: u32, matter: usize) -> Arc<FockBasis<f64>> {
        let l = ModeLattice::new(1, cells, 1.0).unwrap();
        Arc::new(FockBasis::new(l, max, matter).unwrap())
    }

    #[test]
    fn two_cell_enumeration_order() {
        let b = basis(2, 2, 1);
        assert_eq!(b.dim(), 6);
        let occs: Vec<_> = (0..6).map(|i| b.occupation(i).to_vec()).collect();
        assert_eq!(
            occs,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn matter_factor_multiplies_dimension() {
        assert_eq!(basis(2, 2, 2).dim(), 12);
        assert_eq!(basis(1, 0, 1).dim(), 1);
        let b = basis(2, 2, 2);
        assert_eq!(b.index(1, &[1, 0]).unwrap(), 7);
        assert_eq!(b.split(7), (1, 1));
    }

    #[test]
    fn three_cells_follow_descending_lexicographic_order() {
        let b = basis(3, 2, 1);
        assert_eq!(b.dim(), 10);
        assert_eq!(b.occupation(4), &[2, 0, 0]);
        assert_eq!(b.occupation(9), &[0, 0, 2]);
    }

    #[test]
    fn dimension_limit_is_enforced() {
        let l = ModeLattice::new(3, 4, 1.0).unwrap();
        let err = FockBasis::<f64>::new(l.clone(), 6, 1).unwrap_err();
        assert!(matches!(err, Error::BasisTooLarge { .. }));
        assert!(FockBasis::<f64>::with_limit(l, 2, 1, 10).is_err());
    }

    #[test]
    fn unknown_occupation_is_rejected() {
        let b = basis(2, 2, 1);
        assert!(matches!(b.index(0, &[2, 1]), Err(Error::NotInBasis { .. })));
        assert!(b.index(1, &[0, 0]).is_err());
    }

    #[test]
    fn superposition_is_normalized() {
        let b = basis(2, 2, 1);
        let one = Cx::new(1.0, 0.0);
        let s = StateVector::superposition(b, &[(0, &[1, 0], one), (0, &[0, 1], one)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let occ = s.cell_occupations();
        assert!((occ[0] - 0.5).abs() < 1e-15 && (occ[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reduced_matter_of_product_state() {
        let b = basis(1, 1, 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::product(
            b,
            &[Cx::new(h, 0.0), Cx::new(0.0, h)],
            &[Cx::new(0.6, 0.0), Cx::new(0.8, 0.0)],
        )
        .unwrap();
        let r = s.reduced_matter();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r[(0, 1)] - Cx::new(0.0, -0.5)).norm() < 1e-15);
        let rho = s.to_density();
        rho.validate().unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&r, &rho.reduced_matter()) < 1e-15);
    }
}
