//! Elementary photon operators on a [`FockBasis`].
//!
//! The position-space field at a cell center is identified with the mode
//! annihilator scaled by the cell volume, `xi(x_i) = a_i / cell_size^(dims/2)`.
//! Builders here return operators on mode amplitudes (no volume factor);
//! the master-equation module applies the field normalization.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::fock::FockBasis;
use crate::lattice::ModeLattice;
use crate::scalar::{cre, Cx, Real};
use crate::sparse::SparseOperator;

fn check_cell<T: Real>(basis: &FockBasis<T>, cell: usize) -> Result<()> {
    basis.lattice().check(cell)
}

/// Bosonic lowering operator `a_cell`, identity on the matter factor.
pub fn annihilation_op<T: Real>(basis: &FockBasis<T>, cell: usize) -> Result<SparseOperator<T>> {
    check_cell(basis, cell)?;
    let p = basis.photon_dim();
    let mut triplets = Vec::new();
    let mut lowered = Vec::with_capacity(basis.cells());
    for src in 0..p {
        let occ = basis.occupation(src);
        let n = occ[cell];
        if n == 0 {
            continue;
        }
        lowered.clear();
        lowered.extend_from_slice(occ);
        lowered[cell] -= 1;
        let dst = basis
            .photon_index(&lowered)
            .expect("lowering stays inside the truncated basis");
        let amp = cre(T::lit(n as f64).sqrt());
        for m in 0..basis.matter_dim() {
            triplets.push((m * p + dst, m * p + src, amp));
        }
    }
    SparseOperator::from_triplets(basis.dim(), triplets)
}

/// Raising operator `a_cell^dagger` (truncated at `max_total`).
pub fn creation_op<T: Real>(basis: &FockBasis<T>, cell: usize) -> Result<SparseOperator<T>> {
    Ok(annihilation_op(basis, cell)?.adjoint())
}

/// Occupation of one cell, `a_cell^dagger a_cell`.
pub fn number_op<T: Real>(basis: &FockBasis<T>, cell: usize) -> Result<SparseOperator<T>> {
    check_cell(basis, cell)?;
    Ok(diagonal_from(basis, |occ| T::lit(occ[cell] as f64)))
}

pub fn total_number_op<T: Real>(basis: &FockBasis<T>) -> SparseOperator<T> {
    diagonal_from(basis, |occ| T::lit(occ.iter().sum::<u32>() as f64))
}

/// Diagonal operator whose entry on `|m> ⊗ |occ>` is `f(occ)`.
pub(crate) fn diagonal_from<T: Real>(basis: &FockBasis<T>, f: impl Fn(&[u32]) -> T) -> SparseOperator<T> {
    let photon: Vec<T> = (0..basis.photon_dim()).map(|p| f(basis.occupation(p))).collect();
    SparseOperator::from_diagonal((0..basis.dim()).map(|i| cre(photon[i % basis.photon_dim()])).collect())
}

/// Photon transfer `a_to^dagger a_from`, optionally restricted to one matter
/// branch (`Some(m)` acts as `|m><m| ⊗ a_to^dagger a_from`).
pub fn transfer_op<T: Real>(
    basis: &FockBasis<T>,
    from: usize,
    to: usize,
    matter: Option<usize>,
) -> Result<SparseOperator<T>> {
    check_cell(basis, from)?;
    check_cell(basis, to)?;
    if from == to {
        let n = number_op(basis, from)?;
        return Ok(match matter {
            None => n,
            Some(m) => restrict_to_matter(basis, &n, m),
        });
    }
    let p = basis.photon_dim();
    let mut triplets = Vec::new();
    let mut moved = Vec::with_capacity(basis.cells());
    for src in 0..p {
        let occ = basis.occupation(src);
        if occ[from] == 0 {
            continue;
        }
        moved.clear();
        moved.extend_from_slice(occ);
        moved[from] -= 1;
        moved[to] += 1;
        let dst = basis
            .photon_index(&moved)
            .expect("transfer conserves the total photon number");
        let amp = cre((T::lit(occ[from] as f64) * T::lit((occ[to] + 1) as f64)).sqrt());
        for m in 0..basis.matter_dim() {
            if matter.is_none_or(|only| only == m) {
                triplets.push((m * p + dst, m * p + src, amp));
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), triplets)
}

fn restrict_to_matter<T: Real>(basis: &FockBasis<T>, op: &SparseOperator<T>, matter: usize) -> SparseOperator<T> {
    let p = basis.photon_dim();
    SparseOperator::from_triplets(
        op.dim(),
        op.iter().filter(|(r, c, _)| r / p == matter && c / p == matter),
    )
    .expect("subset of valid entries")
}

/// Unordered nearest-neighbour cell pairs on the periodic lattice.
pub fn neighbour_pairs<T: Real>(lattice: &ModeLattice<T>) -> Vec<(usize, usize)> {
    let n = lattice.cells_per_axis();
    let mut pairs = BTreeSet::new();
    if n < 2 {
        return Vec::new();
    }
    for cell in 0..lattice.cell_count() {
        let coords = lattice.coords(cell);
        for axis in 0..lattice.dims() {
            let mut next = coords;
            next[axis] = (coords[axis] + 1) % n;
            let other = lattice.index_of(next);
            pairs.insert((cell.min(other), cell.max(other)));
        }
    }
    pairs.into_iter().collect()
}

/// Nearest-neighbour hopping `H = -J sum_<ij> (a_i^dagger a_j + h.c.)`, in s^-1.
pub fn free_hopping<T: Real>(basis: &FockBasis<T>, hopping: T) -> Result<SparseOperator<T>> {
    let mut h = SparseOperator::zero(basis.dim());
    for (i, j) in neighbour_pairs(basis.lattice()) {
        let fwd = transfer_op(basis, i, j, None)?;
        h = h.add(&fwd)?.add(&fwd.adjoint())?;
    }
    Ok(h.scale(cre(-hopping)))
}

/// Real-space kernel of `K^(1/2)` on the periodic lattice, centred on `cell`:
/// `c_j = N^-1 sum_k sqrt(|k|) cos(k . (x_cell - x_j))` with lattice
/// wavenumbers `k = 2 pi m / L` taken in the minimal-image range
/// `m in (-n/2, n/2]`. The `k = 0` mode contributes nothing.
pub fn half_k_kernel<T: Real>(lattice: &ModeLattice<T>, cell: usize) -> Result<Vec<T>> {
    lattice.check(cell)?;
    let n = lattice.cells_per_axis();
    let cells = lattice.cell_count();
    let dims = lattice.dims();
    let two_pi = T::two_pi();
    let k_unit = two_pi / lattice.edge_length();

    // minimal-image integer wavenumber for each momentum index
    let wrap = |m: usize| -> i64 {
        let m = m as i64;
        let n = n as i64;
        if 2 * m > n {
            m - n
        } else {
            m
        }
    };
    let momenta: Vec<([i64; 3], T)> = (0..cells)
        .map(|q| {
            let mc = lattice.coords(q);
            let mut m = [0i64; 3];
            let mut sq = 0i64;
            for d in 0..dims {
                m[d] = wrap(mc[d]);
                sq += m[d] * m[d];
            }
            (m, (k_unit * T::lit(sq as f64).sqrt()).sqrt())
        })
        .collect();

    let centre = lattice.coords(cell);
    let inv_n = T::one() / T::count(cells);
    Ok((0..cells)
        .map(|j| {
            let cj = lattice.coords(j);
            let sum = momenta.iter().fold(T::zero(), |acc, (m, root_k)| {
                if *root_k == T::zero() {
                    return acc;
                }
                // k . dx = 2 pi sum_d m_d (c_d - j_d) / n
                let phase_num: i64 = (0..dims).map(|d| m[d] * (centre[d] as i64 - cj[d] as i64)).sum();
                let phase_num = phase_num.rem_euclid(n as i64);
                let phase = two_pi * T::lit(phase_num as f64) / T::count(n);
                acc + *root_k * phase.cos()
            });
            sum * inv_n
        })
        .collect())
}

/// `sum_j c_j a_j` with `c` the [`half_k_kernel`] centred on `cell`.
pub fn half_k_field_op<T: Real>(basis: &FockBasis<T>, cell: usize) -> Result<SparseOperator<T>> {
    let kernel = half_k_kernel(basis.lattice(), cell)?;
    let mut triplets = Vec::new();
    for (j, c) in kernel.into_iter().enumerate() {
        if c == T::zero() {
            continue;
        }
        triplets.extend(annihilation_op(basis, j)?.iter().map(|(r, col, v)| (r, col, v * c)));
    }
    // entries below rounding noise of the cosine sums are dropped
    let scale = triplets
        .iter()
        .fold(T::zero(), |m, (_, _, v): &(usize, usize, Cx<T>)| m.max(v.re.abs()));
    let floor = scale * T::eps() * T::lit(64.0);
    SparseOperator::from_triplets(basis.dim(), triplets.into_iter().filter(|(_, _, v)| v.re.abs() > floor))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DVector;

    use super::*;
    use crate::fock::StateVector;

    fn basis(cells: usize, max: u32, matter: usize) -> Arc<FockBasis<f64>> {
        let l = ModeLattice::new(1, cells, 1.0).unwrap();
        Arc::new(FockBasis::new(l, max, matter).unwrap())
    }

    #[test]
    fn lowering_single_photon() {
        let b = basis(2, 2, 1);
        let a0 = annihilation_op(&b, 0).unwrap();
        let s = StateVector::basis_state(b.clone(), 0, &[1, 0]).unwrap();
        let out = a0.apply(s.amplitudes()).unwrap();
        let vac = b.index(0, &[0, 0]).unwrap();
        assert_eq!(out[vac], Cx::new(1.0, 0.0));
        assert_eq!(out.iter().filter(|v| v.norm() > 0.0).count(), 1);

        let other = StateVector::basis_state(b, 0, &[0, 1]).unwrap();
        assert!(a0.apply(other.amplitudes()).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn number_expectation_on_split_photon() {
        // <psi| a0^dagger a0 |psi> for (|10> + |01>)/sqrt2, via dense products
        let b = basis(2, 2, 1);
        let a0 = annihilation_op(&b, 0).unwrap().to_dense();
        let n0 = a0.adjoint() * &a0;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = DVector::zeros(6);
        psi[1] = Cx::new(h, 0.0);
        psi[2] = Cx::new(h, 0.0);
        let e = (psi.adjoint() * &n0 * &psi)[(0, 0)];
        assert!((e.re - 0.5).abs() < 1e-15 && e.im.abs() < 1e-15);
    }

    #[test]
    fn number_op_matches_product_of_ladders() {
        let b = basis(3, 3, 2);
        for cell in 0..3 {
            let a = annihilation_op(&b, cell).unwrap();
            let n = number_op(&b, cell).unwrap();
            let product = a.adjoint().mul(&a).unwrap();
            assert_eq!(product.nnz(), n.nnz());
            assert!((product.to_dense() - n.to_dense()).camax() < 1e-14);
        }
        let s = StateVector::basis_state(b.clone(), 1, &[2, 0, 0]).unwrap();
        assert_eq!(s.expectation(&number_op(&b, 0).unwrap()).unwrap().re, 2.0);
    }

    #[test]
    fn cell_numbers_sum_to_total() {
        let b = basis(3, 2, 1);
        let mut sum = SparseOperator::zero(b.dim());
        for c in 0..3 {
            sum = sum.add(&number_op(&b, c).unwrap()).unwrap();
        }
        assert_eq!(sum, total_number_op(&b));
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let b = basis(2, 3, 1);
        for i in 0..2 {
            for j in 0..2 {
                let ai = annihilation_op(&b, i).unwrap();
                let adj = creation_op(&b, j).unwrap();
                let comm = ai.commutator(&adj).unwrap().to_dense();
                for r in 0..b.dim() {
                    if b.total_photons(r) >= b.max_total() {
                        continue;
                    }
                    for c in 0..b.dim() {
                        if b.total_photons(c) >= b.max_total() {
                            continue;
                        }
                        let want = if r == c && i == j { 1.0 } else { 0.0 };
                        assert!((comm[(r, c)] - Cx::new(want, 0.0)).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn hopping_conserves_photon_number() {
        let l = ModeLattice::new(2, 3, 1.0).unwrap();
        let b = FockBasis::new(l, 2, 1).unwrap();
        let h = free_hopping(&b, 0.7).unwrap();
        assert_eq!(h.hermiticity_deviation(), 0.0);
        let n = total_number_op(&b);
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-14);
        assert_eq!(neighbour_pairs(b.lattice()).len(), 18);
        assert_eq!(neighbour_pairs(&ModeLattice::new(1, 2, 1.0).unwrap()), vec![(0, 1)]);
    }

    #[test]
    fn half_k_vanishes_on_single_cell() {
        let b = basis(1, 2, 1);
        assert!(half_k_field_op(&b, 0).unwrap().is_zero());
    }

    #[test]
    fn half_k_two_point_kernel() {
        // k in {0, pi/s}: c = 1/2 sqrt(pi/s) (delta_same - delta_other)
        let s = 1e-4;
        let l = ModeLattice::new(1, 2, s).unwrap();
        let want = 0.5 * (std::f64::consts::PI / s).sqrt();
        for cell in 0..2 {
            let k = half_k_kernel(&l, cell).unwrap();
            assert!((k[cell] - want).abs() < 1e-12 * want);
            assert!((k[1 - cell] + want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn half_k_energy_density_is_hermitian() {
        let b = basis(3, 2, 1);
        for cell in 0..3 {
            let f = half_k_field_op(&b, cell).unwrap();
            let e = f.adjoint().mul(&f).unwrap().to_dense();
            assert!((&e - e.adjoint()).camax() < 1e-14);
        }
    }

    #[test]
    fn transfer_restricted_to_branch() {
        let b = basis(2, 1, 2);
        let t = transfer_op(&b, 0, 1, Some(1)).unwrap();
        assert_eq!(t.nnz(), 1);
        let src = b.index(1, &[1, 0]).unwrap();
        let dst = b.index(1, &[0, 1]).unwrap();
        assert_eq!(t.get(dst, src), Cx::new(1.0, 0.0));
    }
}
