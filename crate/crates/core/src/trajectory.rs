//! Stochastic trajectories: unitary evolution interrupted by collapse events.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::{CollapseEvent, CollapseModel, CollapseParams};
use crate::error::{invalid, Error, Result};
use crate::fock::StateVector;
use crate::propagate::Propagator;
use crate::rng::{derive_seed, trajectory_rng};
use crate::scalar::{Cx, Real};
use crate::sparse::SparseOperator;

/// Trajectories per reduction chunk. Fixed so that floating-point sums do
/// not depend on the number of worker threads.
pub const ENSEMBLE_CHUNK: usize = 64;

/// Scalar quantity recorded at each sample time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Norm,
    TotalPhotons,
    CellOccupation(usize),
    /// `|<0| tr_photons rho |1>|` of the matter factor.
    MatterCoherence,
    /// `sqrt(p_0 p_1)` from the weights of matter branches 0 and 1.
    BranchCoherence,
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Self::Norm => "norm".into(),
            Self::TotalPhotons => "total_photons".into(),
            Self::CellOccupation(c) => format!("n_{c}"),
            Self::MatterCoherence => "matter_coherence".into(),
            Self::BranchCoherence => "branch_coherence".into(),
        }
    }

    pub fn evaluate<T: Real>(&self, state: &StateVector<T>) -> T {
        match self {
            Self::Norm => state.norm(),
            Self::TotalPhotons => state.total_photons(),
            Self::CellOccupation(c) => state.cell_occupations().get(*c).copied().unwrap_or_else(T::zero),
            Self::MatterCoherence => {
                if state.basis().matter_dim() < 2 {
                    return T::zero();
                }
                let r = state.reduced_matter();
                r[(0, 1)].norm_sqr().sqrt()
            }
            Self::BranchCoherence => {
                let w = state.matter_weights();
                if w.len() < 2 {
                    return T::zero();
                }
                (w[0] * w[1]).sqrt()
            }
        }
    }

    /// Norm, total photons, every cell occupation, and matter coherence when
    /// a matter factor is present.
    pub fn defaults<T: Real>(state: &StateVector<T>) -> Vec<Self> {
        let mut out = vec![Self::Norm, Self::TotalPhotons];
        out.extend((0..state.basis().cells()).map(Self::CellOccupation));
        if state.basis().matter_dim() >= 2 {
            out.push(Self::MatterCoherence);
            out.push(Self::BranchCoherence);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOptions<T> {
    pub sample_times: Vec<T>,
    pub observables: Vec<Observable>,
    pub record_states: bool,
}

/// Complete history of one stochastic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<T> {
    pub seed: u64,
    pub events: Vec<CollapseEvent<T>>,
    pub sample_times: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sampled_states: Option<Vec<Vec<Cx<T>>>>,
    pub observables: BTreeMap<String, Vec<T>>,
}

/// Callback payload while stepping a trajectory.
#[derive(Debug)]
pub enum TrajectoryPoint<'a, T: Real> {
    Sample {
        index: usize,
        time: T,
        state: &'a StateVector<T>,
    },
    Event {
        event: &'a CollapseEvent<T>,
        state: &'a StateVector<T>,
    },
}

/// Collapse model plus Hamiltonian over a fixed time window.
#[derive(Debug, Clone)]
pub struct TrajectorySimulator<T: Real> {
    model: CollapseModel<T>,
    propagator: Propagator<T>,
    t_final: T,
}

impl<T: Real> TrajectorySimulator<T> {
    pub fn new(model: CollapseModel<T>, hamiltonian: &SparseOperator<T>, t_final: T) -> Result<Self> {
        if hamiltonian.dim() != model.basis().dim() {
            return Err(Error::DimensionMismatch {
                expected: model.basis().dim(),
                found: hamiltonian.dim(),
            });
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(invalid("t_final", "must be positive and finite"));
        }
        Ok(Self {
            propagator: Propagator::new(hamiltonian)?,
            model,
            t_final,
        })
    }

    pub fn model(&self) -> &CollapseModel<T> {
        &self.model
    }

    pub fn propagator(&self) -> &Propagator<T> {
        &self.propagator
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    fn check_samples(&self, sample_times: &[T]) -> Result<()> {
        let mut last = T::zero();
        for &t in sample_times {
            if t < last || t > self.t_final || !t.is_finite() {
                return Err(invalid(
                    "sample_times",
                    "must be non-decreasing and within [0, t_final]",
                ));
            }
            last = t;
        }
        Ok(())
    }

    fn advance(&self, state: StateVector<T>, dt: T) -> Result<StateVector<T>> {
        if dt == T::zero() || self.propagator.is_identity() {
            return Ok(state);
        }
        let basis = state.basis().clone();
        let amps = self.propagator.apply(state.amplitudes(), dt)?;
        StateVector::from_amplitudes(basis, amps)
    }

    /// Steps one trajectory, reporting every sample and event to `visit`.
    /// Returning `ControlFlow::Break` from the visitor ends the run early.
    pub fn simulate<F>(&self, initial: &StateVector<T>, sample_times: &[T], seed: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(TrajectoryPoint<'_, T>) -> ControlFlow<()>,
    {
        if initial.dim() != self.model.basis().dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.basis().dim(),
                found: initial.dim(),
            });
        }
        self.check_samples(sample_times)?;
        let mut rng = trajectory_rng(seed);
        let mut state = initial.clone();
        let mut t = T::zero();
        let mut next_sample = 0;

        loop {
            let next = self.model.sample_next_event(t, self.t_final, &mut rng);
            while next_sample < sample_times.len() && next.is_none_or(|(te, _)| sample_times[next_sample] < te) {
                let ts = sample_times[next_sample];
                state = self.advance(state, ts - t)?;
                t = ts;
                let flow = visit(TrajectoryPoint::Sample {
                    index: next_sample,
                    time: ts,
                    state: &state,
                });
                next_sample += 1;
                if flow.is_break() {
                    return Ok(());
                }
            }
            let Some((te, cell)) = next else {
                return Ok(());
            };
            state = self.advance(state, te - t)?;
            t = te;
            let (collapsed, event) = self.model.apply(&state, cell, te, &mut rng)?;
            state = collapsed;
            if visit(TrajectoryPoint::Event {
                event: &event,
                state: &state,
            })
            .is_break()
            {
                return Ok(());
            }
        }
    }

    pub fn run(
        &self,
        initial: &StateVector<T>,
        options: &TrajectoryOptions<T>,
        seed: u64,
    ) -> Result<TrajectoryRecord<T>> {
        let mut events = Vec::new();
        let mut states = options.record_states.then(Vec::new);
        let mut series: Vec<Vec<T>> = vec![Vec::with_capacity(options.sample_times.len()); options.observables.len()];
        self.simulate(initial, &options.sample_times, seed, |point| {
            match point {
                TrajectoryPoint::Sample { state, .. } => {
                    for (obs, out) in options.observables.iter().zip(series.iter_mut()) {
                        out.push(obs.evaluate(state));
                    }
                    if let Some(s) = states.as_mut() {
                        s.push(state.amplitudes().iter().copied().collect());
                    }
                }
                TrajectoryPoint::Event { event, .. } => events.push(event.clone()),
            }
            ControlFlow::Continue(())
        })?;
        Ok(TrajectoryRecord {
            seed,
            events,
            sample_times: options.sample_times.clone(),
            sampled_states: states,
            observables: options.observables.iter().map(Observable::name).zip(series).collect(),
        })
    }

    /// Runs `n` trajectories with seeds `derive_seed(master_seed, i)`,
    /// returned in trajectory order.
    pub fn run_ensemble(
        &self,
        initial: &StateVector<T>,
        options: &TrajectoryOptions<T>,
        n: usize,
        master_seed: u64,
    ) -> Result<Vec<TrajectoryRecord<T>>> {
        (0..n)
            .into_par_iter()
            .map(|i| self.run(initial, options, derive_seed(master_seed, i as u64)))
            .collect()
    }

    /// Ensemble mean of `|psi><psi|` at each sample time over `n`
    /// trajectories. The reduction order is fixed by trajectory index.
    pub fn ensemble_density(
        &self,
        initial: &StateVector<T>,
        sample_times: &[T],
        n: usize,
        master_seed: u64,
    ) -> Result<Vec<DMatrix<Cx<T>>>> {
        if n == 0 {
            return Err(invalid("n_trajectories", "must be at least 1"));
        }
        let dim = initial.dim();
        let zero = || vec![DMatrix::<Cx<T>>::zeros(dim, dim); sample_times.len()];
        let chunks = n.div_ceil(ENSEMBLE_CHUNK);
        let partial: Vec<Vec<DMatrix<Cx<T>>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = zero();
                for i in c * ENSEMBLE_CHUNK..((c + 1) * ENSEMBLE_CHUNK).min(n) {
                    let seed = derive_seed(master_seed, i as u64);
                    self.simulate(initial, sample_times, seed, |point| {
                        if let TrajectoryPoint::Sample { index, state, .. } = point {
                            let a = state.amplitudes();
                            acc[index] += a * a.adjoint();
                        }
                        ControlFlow::Continue(())
                    })?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut total = zero();
        for chunk in partial {
            for (t, c) in total.iter_mut().zip(chunk) {
                *t += c;
            }
        }
        let inv = T::one() / T::count(n);
        for m in total.iter_mut() {
            m.iter_mut().for_each(|v| *v = v.scale(inv));
        }
        Ok(total)
    }
}

/// Runs a single trajectory with the default observables and state
/// snapshots at `sample_times`.
pub fn run_trajectory<T: Real>(
    initial: &StateVector<T>,
    hamiltonian: &SparseOperator<T>,
    params: &CollapseParams<T>,
    t_final: T,
    sample_times: &[T],
    seed: u64,
) -> Result<TrajectoryRecord<T>> {
    let model = CollapseModel::new(initial.basis().clone(), *params)?;
    let sim = TrajectorySimulator::new(model, hamiltonian, t_final)?;
    let options = TrajectoryOptions {
        sample_times: sample_times.to_vec(),
        observables: Observable::defaults(initial),
        record_states: true,
    };
    sim.run(initial, &options, seed)
}

/// `n` evenly spaced times from 0 to `t_final` inclusive.
pub fn uniform_grid<T: Real>(t_final: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![t_final],
        _ => (0..n).map(|i| t_final * T::count(i) / T::count(n - 1)).collect(),
    }
}
