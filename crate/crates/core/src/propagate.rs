//! Unitary propagation `psi(t) = exp(-i H t) psi(0)` for a time-independent
//! Hermitian Hamiltonian.
//!
//! Small spaces use a one-off Hermitian eigendecomposition, which gives the
//! exact propagator for any interval in `O(dim^2)`. Larger spaces use Lanczos
//! Krylov steps with a posteriori error control.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cre, phase_neg, Cx, Real};
use crate::sparse::SparseOperator;

/// Largest dimension handled by dense diagonalization.
pub const DENSE_LIMIT: usize = 512;
/// Local error target for Krylov steps.
pub const KRYLOV_TOLERANCE: f64 = 1e-9;
const KRYLOV_MAX_BASIS: usize = 30;

/// Hermiticity tolerance for accepted Hamiltonians.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Propagator<T: Real> {
    Identity {
        dim: usize,
    },
    Spectral {
        vectors: DMatrix<Cx<T>>,
        energies: DVector<T>,
    },
    Krylov {
        hamiltonian: SparseOperator<T>,
        tolerance: T,
    },
}

pub(crate) fn check_hermitian<T: Real>(h: &SparseOperator<T>) -> Result<()> {
    let dev = h.hermiticity_deviation().as_f64();
    if dev > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

impl<T: Real> Propagator<T> {
    pub fn new(hamiltonian: &SparseOperator<T>) -> Result<Self> {
        Self::with_dense_limit(hamiltonian, DENSE_LIMIT)
    }

    pub fn with_dense_limit(hamiltonian: &SparseOperator<T>, dense_limit: usize) -> Result<Self> {
        check_hermitian(hamiltonian)?;
        if hamiltonian.is_zero() {
            return Ok(Self::Identity { dim: hamiltonian.dim() });
        }
        if hamiltonian.dim() <= dense_limit {
            let eig = hamiltonian.to_dense().symmetric_eigen();
            return Ok(Self::Spectral {
                vectors: eig.eigenvectors,
                energies: eig.eigenvalues,
            });
        }
        Ok(Self::Krylov {
            hamiltonian: hamiltonian.clone(),
            tolerance: T::lit(KRYLOV_TOLERANCE),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Identity { dim } => *dim,
            Self::Spectral { energies, .. } => energies.len(),
            Self::Krylov { hamiltonian, .. } => hamiltonian.dim(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity { .. })
    }

    /// Returns `exp(-i H t) psi`.
    pub fn apply(&self, psi: &DVector<Cx<T>>, t: T) -> Result<DVector<Cx<T>>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        if t == T::zero() {
            return Ok(psi.clone());
        }
        match self {
            Self::Identity { .. } => Ok(psi.clone()),
            Self::Spectral { vectors, energies } => {
                let mut coeffs = vectors.ad_mul(psi);
                for (c, &e) in coeffs.iter_mut().zip(energies.iter()) {
                    *c *= phase_neg(e * t);
                }
                Ok(vectors * coeffs)
            }
            Self::Krylov { hamiltonian, tolerance } => krylov_propagate(hamiltonian, psi, t, *tolerance),
        }
    }
}

struct Lanczos<T: Real> {
    basis: Vec<DVector<Cx<T>>>,
    alpha: Vec<T>,
    beta: Vec<T>,
    next_beta: T,
}

/// Lanczos basis for `H` started from `v / |v|`.
fn lanczos<T: Real>(h: &SparseOperator<T>, v: &DVector<Cx<T>>, max_m: usize) -> Lanczos<T> {
    let beta0 = v.norm();
    let mut q = vec![v.unscale(beta0)];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let breakdown = T::lit(1e-13) * beta0.max(T::one());
    let mut next_beta = T::zero();
    for j in 0..max_m {
        let mut w = h.apply(&q[j]).expect("dimension checked by caller");
        let a = q[j].dotc(&w).re;
        w -= q[j].scale(a);
        if j > 0 {
            w -= q[j - 1].scale(beta[j - 1]);
        }
        // full reorthogonalization keeps the short recurrence stable
        for qi in &q {
            let proj = qi.dotc(&w);
            w -= qi * proj;
        }
        alpha.push(a);
        let b = w.norm();
        if j + 1 == max_m || b < breakdown {
            next_beta = if b < breakdown { T::zero() } else { b };
            break;
        }
        beta.push(b);
        q.push(w.unscale(b));
    }
    Lanczos {
        basis: q,
        alpha,
        beta,
        next_beta,
    }
}

fn krylov_propagate<T: Real>(
    h: &SparseOperator<T>,
    psi: &DVector<Cx<T>>,
    t: T,
    tolerance: T,
) -> Result<DVector<Cx<T>>> {
    let dim = h.dim();
    let max_m = KRYLOV_MAX_BASIS.min(dim);
    let mut v = psi.clone();
    let mut done = T::zero();
    let mut step = t;
    let min_step = t.abs() * T::lit(1e-12);
    while (t - done).abs() > T::zero() {
        if (step.abs()) > (t - done).abs() {
            step = t - done;
        }
        let beta0 = v.norm();
        let Lanczos {
            basis: q,
            alpha,
            beta,
            next_beta,
        } = lanczos(h, &v, max_m);
        let m = alpha.len();
        let mut tri = DMatrix::<T>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alpha[i];
            if i + 1 < m {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = tri.symmetric_eigen();
        loop {
            // y = S exp(-i theta step) S^T e1
            let y: DVector<Cx<T>> = DVector::from_fn(m, |r, _| {
                (0..m).fold(cre(T::zero()), |acc, k| {
                    acc + phase_neg(eig.eigenvalues[k] * step) * eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)]
                })
            });
            let err = beta0 * next_beta * y[m - 1].norm_sqr().sqrt();
            if err <= tolerance || step.abs() <= min_step {
                let mut out = DVector::zeros(dim);
                for (qi, yi) in q.iter().zip(y.iter()) {
                    out += qi * (*yi * beta0);
                }
                v = out;
                done += step;
                step *= T::lit(2.0);
                break;
            }
            step *= T::lit(0.5);
        }
        if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::IntegrationFailed {
                time: done.as_f64(),
                reason: "non-finite Krylov state".into(),
            });
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{FockBasis, StateVector};
    use crate::lattice::ModeLattice;
    use crate::operators::free_hopping;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let p = Propagator::new(&SparseOperator::<f64>::zero(4)).unwrap();
        assert!(p.is_identity());
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = SparseOperator::from_triplets(2, vec![(0, 1, Cx::new(1.0, 0.0))]).unwrap();
        assert!(matches!(Propagator::new(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn diagonal_phases() {
        let h = SparseOperator::from_diagonal(vec![Cx::new(1.0, 0.0), Cx::new(-2.0, 0.0)]);
        let p = Propagator::new(&h).unwrap();
        let psi = DVector::from_vec(vec![Cx::new(0.6, 0.0), Cx::new(0.8, 0.0)]);
        let out = p.apply(&psi, 0.3).unwrap();
        assert!((out[0] - Cx::new(0.6, 0.0) * Cx::new(0.0, -0.3).exp()).norm() < 1e-14);
        assert!((out[1] - Cx::new(0.8, 0.0) * Cx::new(0.0, 0.6).exp()).norm() < 1e-14);
    }

    #[test]
    fn krylov_agrees_with_spectral() {
        let l = ModeLattice::new(1, 4, 1.0).unwrap();
        let b = Arc::new(FockBasis::new(l, 3, 1).unwrap());
        let h = free_hopping(&b, 1.3).unwrap();
        let psi = StateVector::superposition(
            b.clone(),
            &[
                (0, &[1, 0, 0, 0], Cx::new(1.0, 0.0)),
                (0, &[0, 2, 1, 0], Cx::new(0.0, 1.0)),
                (0, &[0, 0, 0, 0], Cx::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let exact = Propagator::new(&h).unwrap();
        let krylov = Propagator::with_dense_limit(&h, 0).unwrap();
        assert!(matches!(krylov, Propagator::Krylov { .. }));
        for &t in &[0.01, 0.7, 5.0] {
            let a = exact.apply(psi.amplitudes(), t).unwrap();
            let k: DVector<Cx<f64>> = krylov.apply(psi.amplitudes(), t).unwrap();
            assert!((a - &k).norm() < 1e-8, "t = {t}");
            assert!((k.norm() - 1.0).abs() < 1e-9);
        }
    }
}
