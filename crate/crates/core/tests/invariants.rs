use std::sync::Arc;

use nalgebra::{ComplexField, DVector};
use photon_collapse::collapse::smeared_number_op;
use photon_collapse::operators::{
    annihilation_op, creation_op, free_hopping, half_k_field_op, total_number_op, transfer_op,
};
use photon_collapse::rng::trajectory_rng;
use photon_collapse::trajectory::{run_trajectory, uniform_grid};
use photon_collapse::{
    CollapseModel, CollapseParams, Cx, FockBasis, ModeLattice, Propagator, SparseOperator, StateVector,
};
use proptest::prelude::*;

fn basis(dims: usize, n: usize, cutoff: u32, matter: usize) -> Arc<FockBasis<f64>> {
    Arc::new(FockBasis::new(ModeLattice::new(dims, n, 1e-4).unwrap(), cutoff, matter).unwrap())
}

fn state_from(b: &Arc<FockBasis<f64>>, raw: &[(f64, f64)]) -> StateVector<f64> {
    let amps = DVector::from_fn(b.dim(), |i, _| {
        let (re, im) = raw[i % raw.len()];
        Cx::new(re + 1e-3, im)
    });
    StateVector::from_amplitudes(b.clone(), amps).unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..24)
}

fn params(b: f64) -> CollapseParams<f64> {
    CollapseParams {
        a: 1e-4,
        b,
        mu: 1e4,
        lambda_csl: 0.0,
        m_n: 1.67492749804e-27,
    }
}

/// Composite Simpson rule over a window covering all eigenvalues.
fn integrate_outcome(model: &CollapseModel<f64>, s: &StateVector<f64>, cell: usize) -> f64 {
    let eig = model.eigenvalues(cell);
    let sigma = (1.0 / (2.0 * model.params().b)).sqrt();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 12.0 * sigma;
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for k in 0..=n {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * model.outcome_density(s, cell, lo + h * k as f64);
    }
    sum * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outcome_density_is_normalized(raw in amplitudes(), b in 0.5f64..50.0, cell in 0usize..2) {
        let bs = basis(1, 2, 3, 1);
        let s = state_from(&bs, &raw);
        let model = CollapseModel::new(bs, params(b)).unwrap();
        prop_assert!((integrate_outcome(&model, &s, cell) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn collapses_keep_states_normalized(raw in amplitudes(), b in 0.1f64..1e4, seed in any::<u64>()) {
        let bs = basis(1, 3, 2, 2);
        let model = CollapseModel::new(bs.clone(), params(b)).unwrap();
        let mut s = state_from(&bs, &raw);
        let mut rng = trajectory_rng(seed);
        for k in 0..20 {
            s = model.apply(&s, k % 3, 0.0, &mut rng).unwrap().0;
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smeared_number_is_hermitian_and_diagonal(a in 1e-5f64..1e-3, cell in 0usize..4) {
        let bs = basis(2, 2, 2, 1);
        let n = smeared_number_op(&bs, a, cell).unwrap();
        prop_assert!(n.is_diagonal());
        prop_assert!(n.hermiticity_deviation() == 0.0);
    }

    #[test]
    fn hopping_and_transfer_conserve_photon_number(j in -2.0f64..2.0, from in 0usize..3, to in 0usize..3) {
        let bs = basis(1, 3, 3, 1);
        let n = total_number_op(&bs);
        let h = free_hopping(&bs, j).unwrap();
        prop_assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);
        let t = transfer_op(&bs, from, to, None).unwrap();
        prop_assert!(t.commutator(&n).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn propagation_is_unitary(raw in amplitudes(), j in 0.1f64..3.0, t in 0.0f64..5.0) {
        let bs = basis(1, 3, 3, 1);
        let h = free_hopping(&bs, j).unwrap();
        let s = state_from(&bs, &raw);
        let dense = Propagator::new(&h).unwrap();
        let krylov = Propagator::with_dense_limit(&h, 0).unwrap();
        let a = dense.apply(s.amplitudes(), t).unwrap();
        let b = krylov.apply(s.amplitudes(), t).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-10);
        prop_assert!((&a - &b).norm() < 1e-7);
    }

    #[test]
    fn trajectories_are_reproducible(seed in any::<u64>()) {
        let bs = basis(1, 2, 2, 1);
        let s = StateVector::basis_state(bs.clone(), 0, &[1, 0]).unwrap();
        let h = free_hopping(&bs, 1.0).unwrap();
        let grid = uniform_grid(1e-3, 4);
        let a = run_trajectory(&s, &h, &params(2.0), 1e-3, &grid, seed).unwrap();
        let b = run_trajectory(&s, &h, &params(2.0), 1e-3, &grid, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn canonical_commutator_below_cutoff() {
    let bs = basis(1, 2, 3, 1);
    for i in 0..2 {
        for j in 0..2 {
            let a = annihilation_op(&bs, i).unwrap();
            let ad = creation_op(&bs, j).unwrap();
            let c = a.commutator(&ad).unwrap();
            for k in 0..bs.photon_dim() {
                if bs.total_photons(k) < bs.max_total() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    for col in 0..bs.dim() {
                        let want = if col == k { expect } else { 0.0 };
                        assert!((c.get(k, col) - Cx::new(want, 0.0)).modulus() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn half_k_field_vanishes_on_vacuum() {
    let bs = basis(1, 4, 2, 1);
    let f = half_k_field_op(&bs, 1).unwrap();
    let vac = StateVector::basis_state(bs.clone(), 0, &[0, 0, 0, 0]).unwrap();
    assert!(f.apply(vac.amplitudes()).unwrap().norm() < 1e-15);
    assert!(SparseOperator::<f64>::zero(3).is_zero());
}
