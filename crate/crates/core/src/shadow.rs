//! Two-branch matter system whose position imprints a photon-occupancy
//! shadow, so that photon-only collapses localize the matter indirectly.
//!
//! Matter index 0 is branch A, index 1 is branch B. Ambient light is a
//! definite occupation state: every cell in either shadow holds
//! `ambient_occupancy` photons, and the cells in branch `beta`'s own shadow
//! lose `round(deficit * ambient_occupancy)` of them. Cells outside both
//! shadows start empty; a large physical shadow is represented by a small
//! lattice plus the collapse model's rate multiplier.

use std::ops::ControlFlow;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::{CollapseModel, CollapseParams};
use crate::error::{invalid, Error, Result};
use crate::fock::{trace_distance, DensityMatrix, FockBasis, StateVector};
use crate::operators::transfer_op;
use crate::propagate::Propagator;
use crate::rng::{derive_seed, trajectory_rng};
use crate::scalar::{Cx, Real};
use crate::sparse::SparseOperator;
use crate::trajectory::{uniform_grid, TrajectoryPoint, TrajectorySimulator};

pub const BRANCH_A: usize = 0;
pub const BRANCH_B: usize = 1;
/// Coherence below which the grain counts as effectively collapsed.
pub const DEFAULT_THRESHOLD: f64 = 0.1;
/// Thresholds reported in the first-passage curve.
pub const CURVE_THRESHOLDS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowModel {
    /// Cells shadowed when the grain sits at A (index 0) or B (index 1).
    pub branch_shadow_cells: [Vec<usize>; 2],
    /// Scattering targets paired one-to-one with each branch's shadow
    /// cells. May be empty when no scattering is applied.
    #[serde(default)]
    pub reservoir_cells: [Vec<usize>; 2],
    pub deficit: f64,
    pub ambient_occupancy: u32,
}

impl Default for ShadowModel {
    fn default() -> Self {
        Self {
            branch_shadow_cells: [vec![0], vec![]],
            reservoir_cells: [vec![], vec![]],
            deficit: 1.0 / 3.0,
            ambient_occupancy: 3,
        }
    }
}

impl ShadowModel {
    pub fn validate(&self, cells: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.deficit) {
            return Err(invalid("deficit", "must lie in [0, 1]"));
        }
        let [a, b] = &self.branch_shadow_cells;
        for &c in a.iter().chain(b).chain(self.reservoir_cells.iter().flatten()) {
            if c >= cells {
                return Err(Error::IndexOutOfBounds {
                    what: "shadow cell",
                    index: c,
                    len: cells,
                });
            }
        }
        for set in self.branch_shadow_cells.iter().chain(&self.reservoir_cells) {
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() {
                return Err(invalid("shadow cells", "repeated cell index"));
            }
        }
        if a.iter().any(|c| b.contains(c)) {
            return Err(invalid("branch_shadow_cells", "shadows of A and B overlap"));
        }
        for (beta, res) in self.reservoir_cells.iter().enumerate() {
            if res.is_empty() {
                continue;
            }
            if res.len() != self.branch_shadow_cells[beta].len() {
                return Err(invalid(
                    "reservoir_cells",
                    "each branch needs one reservoir per shadow cell",
                ));
            }
            if res.iter().any(|c| a.contains(c) || b.contains(c)) {
                return Err(invalid("reservoir_cells", "reservoir overlaps a shadow cell"));
            }
        }
        Ok(())
    }

    /// Photons removed from each cell of a branch's own shadow.
    pub fn deficit_photons(&self) -> u32 {
        (self.deficit * self.ambient_occupancy as f64).round() as u32
    }

    /// Occupation pattern of the photon record for `branch`.
    pub fn branch_occupation(&self, branch: usize, cells: usize) -> Result<Vec<u32>> {
        self.validate(cells)?;
        if branch > 1 {
            return Err(Error::IndexOutOfBounds {
                what: "branch",
                index: branch,
                len: 2,
            });
        }
        let mut occ = vec![0; cells];
        for &c in self.branch_shadow_cells.iter().flatten() {
            occ[c] = self.ambient_occupancy;
        }
        let removed = self.deficit_photons();
        for &c in &self.branch_shadow_cells[branch] {
            occ[c] -= removed;
        }
        Ok(occ)
    }
}

fn check_two_branch<T: Real>(basis: &FockBasis<T>) -> Result<()> {
    if basis.matter_dim() != 2 {
        return Err(invalid("matter_dim", "shadow model needs exactly two matter branches"));
    }
    Ok(())
}

/// `sum_beta c_beta |beta> ⊗ |record_beta>`, normalized.
pub fn build_joint_state<T: Real>(
    grain_amplitudes: [Cx<T>; 2],
    shadow: &ShadowModel,
    basis: Arc<FockBasis<T>>,
) -> Result<StateVector<T>> {
    check_two_branch(&basis)?;
    let cells = basis.cells();
    let mut terms = Vec::with_capacity(2);
    let records = [
        shadow.branch_occupation(BRANCH_A, cells)?,
        shadow.branch_occupation(BRANCH_B, cells)?,
    ];
    for (beta, occ) in records.iter().enumerate() {
        let total: u32 = occ.iter().sum();
        if total > basis.max_total() {
            return Err(invalid(
                "max_total",
                format!(
                    "cutoff {} cannot hold the ambient configuration ({total} photons)",
                    basis.max_total()
                ),
            ));
        }
        terms.push((beta, occ.as_slice(), grain_amplitudes[beta]));
    }
    StateVector::superposition(basis, &terms)
}

/// Hermitian generator of the branch-controlled beam splitters:
/// `G = sum_beta |beta><beta| ⊗ sum_k i(a_r^dagger a_s - a_s^dagger a_r)`,
/// so that `exp(-i theta G)` moves shadow-cell photons into reservoirs.
pub fn scattering_generator<T: Real>(shadow: &ShadowModel, basis: &FockBasis<T>) -> Result<SparseOperator<T>> {
    check_two_branch(basis)?;
    shadow.validate(basis.cells())?;
    let mut g = SparseOperator::zero(basis.dim());
    let i = Cx::new(T::zero(), T::one());
    for beta in 0..2 {
        for (&s, &r) in shadow.branch_shadow_cells[beta]
            .iter()
            .zip(&shadow.reservoir_cells[beta])
        {
            let out = transfer_op(basis, s, r, Some(beta))?;
            let back = transfer_op(basis, r, s, Some(beta))?;
            g = g.add(&out.add(&back.scale(-Cx::new(T::one(), T::zero())))?.scale(i))?;
        }
    }
    Ok(g)
}

/// Applies the scattering rotation by angle `strength`. A single shadow
/// photon with `strength = pi/2` ends up entirely in its reservoir.
pub fn apply_shadow_scattering<T: Real>(
    joint: &StateVector<T>,
    shadow: &ShadowModel,
    strength: T,
) -> Result<StateVector<T>> {
    if shadow.reservoir_cells.iter().all(Vec::is_empty) && strength != T::zero() {
        return Err(invalid("reservoir_cells", "scattering needs reservoir cells"));
    }
    let g = scattering_generator(shadow, joint.basis())?;
    let amps = Propagator::new(&g)?.apply(joint.amplitudes(), strength)?;
    StateVector::from_amplitudes(joint.basis().clone(), amps)
}

/// Anything with a two-branch matter factor.
pub trait MatterReduced<T: Real> {
    fn reduced_matter_matrix(&self) -> DMatrix<Cx<T>>;
}

impl<T: Real> MatterReduced<T> for StateVector<T> {
    fn reduced_matter_matrix(&self) -> DMatrix<Cx<T>> {
        self.reduced_matter()
    }
}

impl<T: Real> MatterReduced<T> for DensityMatrix<T> {
    fn reduced_matter_matrix(&self) -> DMatrix<Cx<T>> {
        self.reduced_matter()
    }
}

impl<T: Real> MatterReduced<T> for DMatrix<Cx<T>> {
    fn reduced_matter_matrix(&self) -> DMatrix<Cx<T>> {
        self.clone()
    }
}

/// `|<A| tr_photons rho |B>|`.
pub fn grain_coherence<T: Real, S: MatterReduced<T> + ?Sized>(state: &S) -> T {
    let m = state.reduced_matter_matrix();
    if m.nrows() < 2 {
        return T::zero();
    }
    m[(BRANCH_A, BRANCH_B)].modulus()
}

/// `sqrt(p_A p_B)`: the coherence the grain would retain if the photon
/// records were erased. Only collapses that distinguish the records lower it.
pub fn branch_coherence<T: Real>(state: &StateVector<T>) -> T {
    let w = state.matter_weights();
    if w.len() < 2 {
        return T::zero();
    }
    (w[BRANCH_A] * w[BRANCH_B]).sqrt()
}

/// Total rate of record-distinguishing collapses,
/// `mu V_cell * multiplier * sum_x (1 - exp(-(b/4)(nu_A - nu_B)^2))`.
pub fn distinguishing_rate<T: Real>(model: &CollapseModel<T>, shadow: &ShadowModel) -> Result<T> {
    let basis = model.basis();
    let cells = basis.cells();
    let idx = |beta| -> Result<usize> {
        let occ = shadow.branch_occupation(beta, cells)?;
        basis.photon_index(&occ).ok_or(Error::NotInBasis { occupation: occ })
    };
    let (ia, ib) = (idx(BRANCH_A)?, idx(BRANCH_B)?);
    let quarter_b = model.params().b * T::lit(0.25);
    let per_cell = model.params().mu_cell(basis.lattice()) * model.rate_multiplier();
    let mut sum = T::zero();
    for c in 0..cells {
        let eig = model.eigenvalues(c);
        let d = eig[ia] - eig[ib];
        sum += T::one() - (-quarter_b * d * d).exp();
    }
    Ok(per_cell * sum)
}

/// Everything needed for one effective-collapse-time experiment.
#[derive(Debug, Clone)]
pub struct ShadowExperiment<T: Real> {
    pub shadow: ShadowModel,
    pub basis: Arc<FockBasis<T>>,
    pub params: CollapseParams<T>,
    /// Stands in for shadow cells that are not simulated.
    pub rate_multiplier: T,
    pub grain_amplitudes: [Cx<T>; 2],
    pub scattering_strength: T,
    pub t_final: T,
    /// Points on the coherence curve grid.
    pub samples: usize,
}

impl<T: Real> ShadowExperiment<T> {
    pub fn model(&self) -> Result<CollapseModel<T>> {
        CollapseModel::new(self.basis.clone(), self.params)?.with_rate_multiplier(self.rate_multiplier)
    }

    pub fn initial_state(&self) -> Result<StateVector<T>> {
        let joint = build_joint_state(self.grain_amplitudes, &self.shadow, self.basis.clone())?;
        if self.scattering_strength == T::zero() {
            return Ok(joint);
        }
        apply_shadow_scattering(&joint, &self.shadow, self.scattering_strength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub threshold: f64,
    /// `None` when at least half the trajectories never cross.
    pub median: Option<f64>,
    pub censored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub median: Vec<f64>,
    pub lower_quartile: Vec<f64>,
    pub upper_quartile: Vec<f64>,
    pub mean_branch: Vec<f64>,
    pub mean_reduced: Vec<f64>,
}

impl CoherenceCurve {
    /// `time,median,q25,q75,mean_branch,mean_reduced` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,median,q25,q75,mean_branch,mean_reduced\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.times[i],
                self.median[i],
                self.lower_quartile[i],
                self.upper_quartile[i],
                self.mean_branch[i],
                self.mean_reduced[i]
            ));
        }
        out
    }
}

/// First-passage statistics of the branch coherence below `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseTimeStats {
    pub threshold: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    pub median: Option<f64>,
    pub lower_quartile: Option<f64>,
    pub upper_quartile: Option<f64>,
    /// Trajectories still above threshold at `t_final`.
    pub censored: usize,
    pub t_final: f64,
    pub distinguishing_rate: f64,
    /// `1 / distinguishing_rate`; infinite when nothing distinguishes the
    /// records.
    pub analytic_time: f64,
    pub thresholds: Vec<ThresholdPoint>,
    pub curve: CoherenceCurve,
}

/// Quantile of first-passage times where censored runs count as infinite.
fn censored_quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if !b.is_finite() {
        return None;
    }
    Some(a + (b - a) * (pos - lo as f64))
}

fn quantile_f64(sorted: &[f64], q: f64) -> f64 {
    censored_quantile(sorted, q).unwrap_or(f64::NAN)
}

/// Runs `n_trajectories` of the shadow experiment and reports when the
/// grain's branch coherence first drops below `threshold`.
pub fn effective_collapse_time<T: Real>(
    experiment: &ShadowExperiment<T>,
    hamiltonian: &SparseOperator<T>,
    threshold: f64,
    n_trajectories: usize,
    seed: u64,
) -> Result<CollapseTimeStats> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(invalid("threshold", "must lie in (0, 0.5)"));
    }
    if n_trajectories == 0 {
        return Err(invalid("n_trajectories", "must be at least 1"));
    }
    if experiment.samples < 2 {
        return Err(invalid("samples", "need at least 2 curve points"));
    }
    let model = experiment.model()?;
    let rate = distinguishing_rate(&model, &experiment.shadow)?.as_f64();
    let initial = experiment.initial_state()?;
    let sim = TrajectorySimulator::new(model, hamiltonian, experiment.t_final)?;
    let grid = uniform_grid(experiment.t_final, experiment.samples);

    let mut thresholds: Vec<f64> = CURVE_THRESHOLDS.to_vec();
    if !thresholds.iter().any(|t| (t - threshold).abs() < 1e-15) {
        thresholds.push(threshold);
        thresholds.sort_by(f64::total_cmp);
    }

    struct Run {
        passage: Vec<f64>,
        branch: Vec<f64>,
        reduced: Vec<f64>,
    }
    let runs: Vec<Run> = (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let mut run = Run {
                passage: vec![f64::INFINITY; thresholds.len()],
                branch: vec![0.0; grid.len()],
                reduced: vec![0.0; grid.len()],
            };
            let note = |t: f64, c: f64, passage: &mut Vec<f64>| {
                for (k, &th) in thresholds.iter().enumerate() {
                    if c < th && passage[k].is_infinite() {
                        passage[k] = t;
                    }
                }
            };
            sim.simulate(&initial, &grid, derive_seed(seed, i as u64), |point| {
                match point {
                    TrajectoryPoint::Sample { index, time, state } => {
                        let c = branch_coherence(state).as_f64();
                        run.branch[index] = c;
                        run.reduced[index] = grain_coherence(state).as_f64();
                        note(time.as_f64(), c, &mut run.passage);
                    }
                    TrajectoryPoint::Event { event, state } => {
                        note(event.time.as_f64(), branch_coherence(state).as_f64(), &mut run.passage);
                    }
                }
                ControlFlow::Continue(())
            })?;
            Ok(run)
        })
        .collect::<Result<_>>()?;

    let n = n_trajectories as f64;
    let mut curve = CoherenceCurve {
        times: grid.iter().map(|t| t.as_f64()).collect(),
        median: Vec::with_capacity(grid.len()),
        lower_quartile: Vec::with_capacity(grid.len()),
        upper_quartile: Vec::with_capacity(grid.len()),
        mean_branch: Vec::with_capacity(grid.len()),
        mean_reduced: Vec::with_capacity(grid.len()),
    };
    for k in 0..grid.len() {
        let mut col: Vec<f64> = runs.iter().map(|r| r.branch[k]).collect();
        curve.mean_branch.push(col.iter().sum::<f64>() / n);
        curve
            .mean_reduced
            .push(runs.iter().map(|r| r.reduced[k]).sum::<f64>() / n);
        col.sort_by(f64::total_cmp);
        curve.median.push(quantile_f64(&col, 0.5));
        curve.lower_quartile.push(quantile_f64(&col, 0.25));
        curve.upper_quartile.push(quantile_f64(&col, 0.75));
    }

    let passage_for = |k: usize| {
        let mut times: Vec<f64> = runs.iter().map(|r| r.passage[k]).collect();
        times.sort_by(f64::total_cmp);
        times
    };
    let points: Vec<ThresholdPoint> = thresholds
        .iter()
        .enumerate()
        .map(|(k, &th)| {
            let times = passage_for(k);
            ThresholdPoint {
                threshold: th,
                median: censored_quantile(&times, 0.5),
                censored: times.iter().filter(|t| t.is_infinite()).count(),
            }
        })
        .collect();
    let main = thresholds
        .iter()
        .position(|t| (t - threshold).abs() < 1e-15)
        .expect("threshold inserted above");
    let times = passage_for(main);

    Ok(CollapseTimeStats {
        threshold,
        n_trajectories,
        seed,
        median: censored_quantile(&times, 0.5),
        lower_quartile: censored_quantile(&times, 0.25),
        upper_quartile: censored_quantile(&times, 0.75),
        censored: points[main].censored,
        t_final: experiment.t_final.as_f64(),
        distinguishing_rate: rate,
        analytic_time: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
        thresholds: points,
        curve,
    })
}

/// Applies `events` collapses at random cells and returns the trace
/// distance between the initial and final reduced matter states.
pub fn matter_drift_under_collapses<T: Real>(
    state: &StateVector<T>,
    model: &CollapseModel<T>,
    events: usize,
    seed: u64,
) -> Result<T> {
    let before = state.reduced_matter();
    let mut rng = trajectory_rng(seed);
    let cells = model.basis().cells();
    let mut current = state.clone();
    for k in 0..events {
        let cell = rand::Rng::random_range(&mut rng, 0..cells);
        current = model.apply(&current, cell, T::count(k), &mut rng)?.0;
    }
    Ok(trace_distance(&before, &current.reduced_matter()))
}
