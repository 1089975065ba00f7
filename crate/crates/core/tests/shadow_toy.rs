use std::f64::consts::{FRAC_PI_2, LN_2};
use std::sync::Arc;

use photon_collapse::master::{evolve_with, Dissipator, EvolveOptions};
use photon_collapse::operators::total_number_op;
use photon_collapse::shadow::{
    apply_shadow_scattering, branch_coherence, build_joint_state, distinguishing_rate, effective_collapse_time,
    grain_coherence, matter_drift_under_collapses, ShadowExperiment, ShadowModel,
};
use photon_collapse::trajectory::{uniform_grid, TrajectorySimulator};
use photon_collapse::{
    CollapseModel, CollapseParams, Cx, DensityMatrix, FockBasis, ModeLattice, SparseOperator, StateVector,
};
use proptest::prelude::*;

const CELL: f64 = 1e-4;

fn params(mu_cell: f64, b: f64) -> CollapseParams<f64> {
    CollapseParams {
        a: CELL,
        b,
        mu: mu_cell / CELL,
        lambda_csl: 0.0,
        m_n: 1.67492749804e-27,
    }
}

fn basis(cells: usize, cutoff: u32) -> Arc<FockBasis<f64>> {
    Arc::new(FockBasis::new(ModeLattice::new(1, cells, CELL).unwrap(), cutoff, 2).unwrap())
}

fn half() -> [Cx<f64>; 2] {
    let h = Cx::new(0.5f64.sqrt(), 0.0);
    [h, h]
}

fn one_cell_shadow(deficit: f64, ambient: u32) -> ShadowModel {
    ShadowModel {
        branch_shadow_cells: [vec![0], vec![]],
        reservoir_cells: [vec![], vec![]],
        deficit,
        ambient_occupancy: ambient,
    }
}

fn scattering_shadow(ambient: u32) -> ShadowModel {
    ShadowModel {
        branch_shadow_cells: [vec![0], vec![]],
        reservoir_cells: [vec![1], vec![]],
        deficit: 0.0,
        ambient_occupancy: ambient,
    }
}

#[test]
fn unentangled_grain_keeps_full_purity() {
    let b = basis(1, 3);
    let psi = build_joint_state(
        [Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)],
        &one_cell_shadow(1.0 / 3.0, 3),
        b,
    )
    .unwrap();
    let rho = psi.reduced_matter();
    let purity = (&rho * &rho).trace().re;
    assert!((purity - 1.0).abs() < 1e-15);
}

#[test]
fn one_photon_record_is_orthogonal() {
    let b = basis(1, 3);
    let shadow = one_cell_shadow(1.0 / 3.0, 3);
    assert_eq!(shadow.branch_occupation(0, 1).unwrap(), vec![2]);
    assert_eq!(shadow.branch_occupation(1, 1).unwrap(), vec![3]);
    let psi = build_joint_state(half(), &shadow, b).unwrap();
    assert!(grain_coherence(&psi) < 1e-15);
    assert!((branch_coherence(&psi) - 0.5).abs() < 1e-15);
}

#[test]
fn no_deficit_means_no_record() {
    let b = basis(1, 3);
    let shadow = one_cell_shadow(0.0, 3);
    let psi = build_joint_state(half(), &shadow, b.clone()).unwrap();
    assert!((grain_coherence(&psi) - 0.5).abs() < 1e-15);
    let model = CollapseModel::new(b, params(1.0, 4.0)).unwrap();
    let mut rng = photon_collapse::rng::trajectory_rng(3);
    let mut s = psi;
    for k in 0..50 {
        s = model.apply(&s, 0, k as f64, &mut rng).unwrap().0;
    }
    assert!((grain_coherence(&s) - 0.5).abs() < 1e-12);
}

#[test]
fn cutoff_too_small_is_rejected() {
    let b = basis(1, 2);
    assert!(build_joint_state(half(), &one_cell_shadow(1.0 / 3.0, 3), b).is_err());
}

#[test]
fn overlapping_shadows_or_reservoirs_are_rejected() {
    let mut s = one_cell_shadow(0.5, 2);
    s.branch_shadow_cells = [vec![0], vec![0]];
    assert!(s.validate(2).is_err());
    let mut s = scattering_shadow(1);
    s.reservoir_cells = [vec![0], vec![]];
    assert!(s.validate(2).is_err());
    let mut s = one_cell_shadow(1.5, 2);
    assert!(s.validate(1).is_err());
    s.deficit = 0.5;
    assert!(s.validate(1).is_ok());
}

#[test]
fn scattering_extremes() {
    let b = basis(2, 1);
    let shadow = scattering_shadow(1);
    let psi = build_joint_state(half(), &shadow, b.clone()).unwrap();
    let same = apply_shadow_scattering(&psi, &shadow, 0.0).unwrap();
    assert!((same.fidelity(&psi) - 1.0).abs() < 1e-15);

    let full = apply_shadow_scattering(&psi, &shadow, FRAC_PI_2).unwrap();
    let moved = b.index(0, &[0, 1]).unwrap();
    assert!((full.amplitudes()[moved].norm_sqr() - 0.5).abs() < 1e-12);
    assert!(grain_coherence(&full) < 1e-12);
}

#[test]
fn partial_scattering_overlap_is_cos_theta_per_photon() {
    for (ambient, cutoff) in [(1u32, 1u32), (2, 2)] {
        let b = basis(2, cutoff);
        let shadow = scattering_shadow(ambient);
        let psi = build_joint_state(half(), &shadow, b).unwrap();
        for theta in [0.2, 0.7, 1.1] {
            let out = apply_shadow_scattering(&psi, &shadow, theta).unwrap();
            let expected = 0.5 * f64::cos(theta).powi(ambient as i32);
            assert!((grain_coherence(&out) - expected).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn scattering_preserves_norm_and_photon_number(theta in -3.2f64..3.2, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let b = basis(3, 3);
        let shadow = ShadowModel {
            branch_shadow_cells: [vec![0], vec![1]],
            reservoir_cells: [vec![2], vec![2]],
            deficit: 0.5,
            ambient_occupancy: 2,
        };
        let amps = [Cx::new(re, im), Cx::new(0.6, 0.0)];
        let psi = build_joint_state(amps, &shadow, b.clone()).unwrap();
        let out = apply_shadow_scattering(&psi, &shadow, theta).unwrap();
        let n = total_number_op(&b);
        prop_assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
        let before = psi.expectation(&n).unwrap().re;
        let after = out.expectation(&n).unwrap().re;
        prop_assert!((before - after).abs() < 1e-12);
        let w0 = psi.matter_weights();
        let w1 = out.matter_weights();
        prop_assert!((w0[0] - w1[0]).abs() < 1e-12);
    }
}

#[test]
fn product_states_leave_matter_untouched_by_collapses() {
    let b = basis(2, 3);
    let matter = [Cx::new(0.6, 0.1), Cx::new(-0.3, 0.7)];
    let photons: Vec<Cx<f64>> = (0..b.photon_dim())
        .map(|i| Cx::new(1.0 / (1.0 + i as f64), 0.2 * i as f64))
        .collect();
    let psi = StateVector::product(b.clone(), &matter, &photons).unwrap();
    let model = CollapseModel::new(b, params(1.0, 4.0)).unwrap();
    let drift = matter_drift_under_collapses(&psi, &model, 1000, 11).unwrap();
    assert!(drift < 1e-12, "drift {drift:e}");
}

fn experiment(b_res: f64, mu_cell: f64, multiplier: f64, deficit: f64, t_final: f64) -> ShadowExperiment<f64> {
    ShadowExperiment {
        shadow: one_cell_shadow(deficit, 3),
        basis: basis(1, 3),
        params: params(mu_cell, b_res),
        rate_multiplier: multiplier,
        grain_amplitudes: half(),
        scattering_strength: 0.0,
        t_final,
        samples: 21,
    }
}

#[test]
fn sharp_collapses_give_median_ln2_over_rate() {
    let exp = experiment(64.0, 1.0, 1.0, 1.0 / 3.0, 20.0);
    let h = SparseOperator::zero(exp.basis.dim());
    let stats = effective_collapse_time(&exp, &h, 0.1, 2000, 5).unwrap();
    let expected = LN_2 / (1.0 - (-16.0f64).exp());
    let median = stats.median.unwrap();
    assert!((median - expected).abs() / expected < 0.1, "{median}");
    assert!((stats.analytic_time - 1.0).abs() < 1e-6);
}

#[test]
fn no_deficit_is_censored() {
    let exp = experiment(4.0, 1.0, 1.0, 0.0, 5.0);
    let h = SparseOperator::zero(exp.basis.dim());
    let stats = effective_collapse_time(&exp, &h, 0.1, 200, 1).unwrap();
    assert_eq!(stats.censored, 200);
    assert!(stats.median.is_none());
    assert!(stats.analytic_time.is_infinite());
}

#[test]
fn rate_multiplier_stands_in_for_a_long_shadow() {
    let exp = experiment(4.0, 1.0, 1e4, 1.0 / 3.0, 2e-3);
    let h = SparseOperator::zero(exp.basis.dim());
    let stats = effective_collapse_time(&exp, &h, 0.1, 2000, 2).unwrap();
    let analytic = 1.0 / (1e4 * (1.0 - (-1.0f64).exp()));
    assert!((stats.analytic_time - analytic).abs() / analytic < 1e-9);
    let median = stats.median.unwrap();
    assert!(
        median / analytic < 2.0 && analytic / median < 2.0,
        "{median:e} vs {analytic:e}"
    );
    assert!(median > 1e-5 && median < 1e-3);
    assert_eq!(stats.curve.times.len(), 21);
    assert!(stats.curve.to_csv().lines().count() == 22);
}

#[test]
fn mean_coherence_never_grows_without_dynamics() {
    let exp = experiment(1.0, 1.0, 1.0, 1.0 / 3.0, 3.0);
    let h = SparseOperator::zero(exp.basis.dim());
    let n = 4000;
    let stats = effective_collapse_time(&exp, &h, 0.1, n, 8).unwrap();
    let tol = 3.0 * 0.5 / (n as f64).sqrt();
    for w in stats.curve.mean_branch.windows(2) {
        assert!(w[1] <= w[0] + tol);
    }
    let first = stats.curve.mean_branch[0];
    let last = *stats.curve.mean_branch.last().unwrap();
    assert!(last < first - 0.1);
}

#[test]
fn ensemble_matter_state_matches_master_equation() {
    let b = basis(2, 1);
    let shadow = scattering_shadow(1);
    let psi = build_joint_state(half(), &shadow, b.clone()).unwrap();
    let psi = apply_shadow_scattering(&psi, &shadow, 0.6).unwrap();
    let model = CollapseModel::new(b.clone(), params(2.0, 4.0)).unwrap();
    let h = SparseOperator::zero(b.dim());
    let times = uniform_grid(1.0, 5);
    let n = 2000;
    let sim = TrajectorySimulator::new(model.clone(), &h, 1.0).unwrap();
    let ens = sim.ensemble_density(&psi, &times, n, 21).unwrap();
    let master = evolve_with(
        &psi.to_density(),
        &h,
        &Dissipator::grw_average_for(&model).unwrap(),
        &EvolveOptions::new(1e-3, times.clone()),
    )
    .unwrap();
    let band = 5.0 / (n as f64).sqrt();
    for (e, m) in ens.into_iter().zip(&master.states) {
        let e = DensityMatrix::new(b.clone(), e).unwrap().reduced_matter();
        let dev = (e - m.reduced_matter()).camax();
        assert!(dev < band, "{dev}");
    }
    let initial = psi.reduced_matter();
    for m in &master.states {
        assert!((m.reduced_matter() - &initial).camax() < 1e-12);
    }
}

#[test]
fn distinguishing_rate_sums_kernel_over_cells() {
    let b = basis(1, 3);
    let model = CollapseModel::new(b, params(2.0, 8.0))
        .unwrap()
        .with_rate_multiplier(3.0)
        .unwrap();
    let r = distinguishing_rate(&model, &one_cell_shadow(1.0 / 3.0, 3)).unwrap();
    assert!((r - 6.0 * (1.0 - (-2.0f64).exp())).abs() < 1e-9);
}
