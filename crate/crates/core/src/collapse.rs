//! Discrete photon-number collapse process.
//!
//! The smeared observable `N(a, x) = sum_j exp(-d(x_j, x)^2 / a^2) n_j` is
//! diagonal in the occupation basis. A collapse centred on cell `x` with
//! pointer value `n` applies the diagonal operator
//! `(b/pi)^(1/4) exp(-(b/2) (N(a,x) - n)^2)` and renormalizes. Outcomes are
//! drawn from `p(n) = |phi_n|^2`, a Gaussian mixture over the eigenvalues of
//! `N(a, x)` with variance `1/(2b)`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{FockBasis, StateVector};
use crate::lattice::ModeLattice;
use crate::scalar::{cre, Real};
use crate::sparse::SparseOperator;

/// Largest accepted collapse resolution `b`.
pub const MAX_RESOLUTION: f64 = 1e12;
/// Norm deviation tolerated on input to a collapse.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Collapse model parameters.
///
/// `a` is the smearing length (m), `b` the inverse variance of the collapse
/// Gaussian, `mu` the event frequency density (events m^-dims s^-1),
/// `lambda_csl` the continuous CSL rate (s^-1) and `m_n` the mass
/// normalization of the energy-density model (kg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseParams<T> {
    pub a: T,
    pub b: T,
    pub mu: T,
    pub lambda_csl: T,
    pub m_n: T,
}

impl<T: Real> CollapseParams<T> {
    /// Rates `mu` and `lambda_csl` may be zero (collapse switched off); all
    /// lengths, `b` and `m_n` must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be positive and finite"))
            }
        };
        let non_negative = |name: &'static str, v: T| {
            if v >= T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be non-negative and finite"))
            }
        };
        positive("a", self.a)?;
        positive("b", self.b)?;
        if self.b.as_f64() > MAX_RESOLUTION {
            return Err(invalid("b", format!("exceeds {MAX_RESOLUTION:e}")));
        }
        non_negative("mu", self.mu)?;
        non_negative("lambda_csl", self.lambda_csl)?;
        positive("m_n", self.m_n)?;
        Ok(())
    }

    /// Per-cell event rate `mu * V_cell`.
    pub fn mu_cell(&self, lattice: &ModeLattice<T>) -> T {
        self.mu * lattice.cell_volume()
    }
}

/// Weight carried by one eigenvalue of `N(a, x)` before a collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenWeight<T> {
    pub value: T,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseEvent<T> {
    pub time: T,
    pub cell_index: usize,
    pub outcome_n: T,
    pub pre_norm_weights: Vec<EigenWeight<T>>,
}

/// Eigenvalues of `N(a, x_center)` on each photon occupation vector.
pub fn smeared_number_eigenvalues<T: Real>(basis: &FockBasis<T>, a: T, center: usize) -> Result<Vec<T>> {
    if !(a > T::zero()) {
        return Err(invalid("a", "must be positive"));
    }
    let lattice = basis.lattice();
    lattice.check(center)?;
    let a2 = a * a;
    let weights: Vec<T> = (0..lattice.cell_count())
        .map(|j| (-lattice.distance_sq(j, center) / a2).exp())
        .collect();
    Ok((0..basis.photon_dim())
        .map(|p| {
            basis
                .occupation(p)
                .iter()
                .zip(&weights)
                .fold(T::zero(), |acc, (&n, &w)| acc + w * T::lit(n as f64))
        })
        .collect())
}

fn joint_diagonal<'a, T: Real>(basis: &'a FockBasis<T>, photon: &'a [T]) -> impl Iterator<Item = T> + 'a {
    let p = basis.photon_dim();
    (0..basis.dim()).map(move |i| photon[i % p])
}

/// `N(a, x_center)` as a diagonal operator.
pub fn smeared_number_op<T: Real>(basis: &FockBasis<T>, a: T, center: usize) -> Result<SparseOperator<T>> {
    let eig = smeared_number_eigenvalues(basis, a, center)?;
    Ok(SparseOperator::from_diagonal(
        joint_diagonal(basis, &eig).map(cre).collect(),
    ))
}

fn gaussian_prefactor<T: Real>(b: T) -> T {
    (b / T::pi()).sqrt().sqrt()
}

fn check_resolution<T: Real>(b: T) -> Result<()> {
    if !(b > T::zero()) || b.as_f64() > MAX_RESOLUTION {
        return Err(invalid("b", format!("must lie in (0, {MAX_RESOLUTION:e}]")));
    }
    Ok(())
}

/// `(b/pi)^(1/4) exp(-(b/2) (N - n)^2)` for a diagonal `N`.
pub fn collapse_operator<T: Real>(n_op: &SparseOperator<T>, b: T, n: T) -> Result<SparseOperator<T>> {
    check_resolution(b)?;
    let diag = n_op.real_diagonal()?;
    let pre = gaussian_prefactor(b);
    let half_b = b * T::lit(0.5);
    Ok(SparseOperator::from_diagonal(
        diag.into_iter()
            .map(|nu| {
                let d = nu - n;
                cre(pre * (-half_b * d * d).exp())
            })
            .collect(),
    ))
}

fn sample_waiting_time<T: Real, R: Rng + ?Sized>(rate: T, rng: &mut R) -> Option<T> {
    if !(rate > T::zero()) {
        return None;
    }
    let e: f64 = Exp1.sample(rng);
    Some(T::lit(e) / rate)
}

/// Next event after `t_now` for total rate `mu * V`, with a uniformly chosen
/// cell. Returns `None` when the sampled time lies beyond `horizon`.
pub fn sample_next_event<T: Real, R: Rng + ?Sized>(
    params: &CollapseParams<T>,
    lattice: &ModeLattice<T>,
    t_now: T,
    horizon: T,
    rng: &mut R,
) -> Option<(T, usize)> {
    next_event(params.mu * lattice.volume(), lattice.cell_count(), t_now, horizon, rng)
}

fn next_event<T: Real, R: Rng + ?Sized>(
    rate: T,
    cells: usize,
    t_now: T,
    horizon: T,
    rng: &mut R,
) -> Option<(T, usize)> {
    let t = t_now + sample_waiting_time(rate, rng)?;
    let cell = rng.random_range(0..cells);
    (t <= horizon).then_some((t, cell))
}

/// `p(n) = |phi_n|^2` for a state given the `N(a, x)` eigenvalue of every
/// photon occupation vector.
pub fn outcome_density<T: Real>(state: &StateVector<T>, eigenvalues: &[T], b: T, n: T) -> T {
    let p = state.basis().photon_dim();
    let norm = (b / T::pi()).sqrt();
    state.amplitudes().iter().enumerate().fold(T::zero(), |acc, (i, a)| {
        let d = n - eigenvalues[i % p];
        acc + a.norm_sqr() * norm * (-b * d * d).exp()
    })
}

/// Precomputed collapse machinery for one basis and parameter set.
#[derive(Debug, Clone)]
pub struct CollapseModel<T: Real> {
    basis: Arc<FockBasis<T>>,
    params: CollapseParams<T>,
    eigenvalues: Vec<Vec<T>>,
    rate_multiplier: T,
}

impl<T: Real> CollapseModel<T> {
    pub fn new(basis: Arc<FockBasis<T>>, params: CollapseParams<T>) -> Result<Self> {
        params.validate()?;
        let eigenvalues = (0..basis.cells())
            .map(|c| smeared_number_eigenvalues(&basis, params.a, c))
            .collect::<Result<_>>()?;
        Ok(Self {
            basis,
            params,
            eigenvalues,
            rate_multiplier: T::one(),
        })
    }

    /// Scales every cell's event rate; a small lattice then stands in for a
    /// region with `multiplier` times as many equivalent cells.
    pub fn with_rate_multiplier(mut self, multiplier: T) -> Result<Self> {
        if !(multiplier > T::zero()) || !multiplier.is_finite() {
            return Err(invalid("rate_multiplier", "must be positive and finite"));
        }
        self.rate_multiplier = multiplier;
        Ok(self)
    }

    pub fn basis(&self) -> &Arc<FockBasis<T>> {
        &self.basis
    }

    pub fn params(&self) -> &CollapseParams<T> {
        &self.params
    }

    pub fn rate_multiplier(&self) -> T {
        self.rate_multiplier
    }

    /// `N(a, x_cell)` eigenvalue per photon occupation vector.
    pub fn eigenvalues(&self, cell: usize) -> &[T] {
        &self.eigenvalues[cell]
    }

    /// Total event rate `mu * V * multiplier`.
    pub fn total_rate(&self) -> T {
        self.params.mu * self.basis.lattice().volume() * self.rate_multiplier
    }

    pub fn sample_next_event<R: Rng + ?Sized>(&self, t_now: T, horizon: T, rng: &mut R) -> Option<(T, usize)> {
        next_event(self.total_rate(), self.basis.cells(), t_now, horizon, rng)
    }

    fn check_state(&self, state: &StateVector<T>, cell: usize) -> Result<()> {
        self.basis.lattice().check(cell)?;
        if state.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: state.dim(),
            });
        }
        let norm = state.norm().as_f64();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// Eigenvalue weights of the state on `N(a, x_cell)`, merged and sorted.
    pub fn eigen_weights(&self, state: &StateVector<T>, cell: usize) -> Vec<EigenWeight<T>> {
        let eig = &self.eigenvalues[cell];
        let p = self.basis.photon_dim();
        let mut pairs: Vec<(T, T)> = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| (eig[i % p], a.norm_sqr()))
            .filter(|(_, w)| *w > T::zero())
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
        let mut out: Vec<EigenWeight<T>> = Vec::new();
        for (value, weight) in pairs {
            match out.last_mut() {
                Some(last) if (value - last.value).abs() <= T::lit(1e-12) * T::one().max(value.abs()) => {
                    last.weight += weight
                }
                _ => out.push(EigenWeight { value, weight }),
            }
        }
        out
    }

    /// `p(n)` for a collapse centred on `cell`.
    pub fn outcome_density(&self, state: &StateVector<T>, cell: usize, n: T) -> T {
        outcome_density(state, &self.eigenvalues[cell], self.params.b, n)
    }

    /// Applies the collapse with a given pointer value `n` and renormalizes.
    pub fn collapse_with_outcome(&self, state: &StateVector<T>, cell: usize, n: T) -> Result<StateVector<T>> {
        self.check_state(state, cell)?;
        let eig = &self.eigenvalues[cell];
        let p = self.basis.photon_dim();
        let half_b = self.params.b * T::lit(0.5);
        let amps = state.amplitudes();

        // Shift exponents by the closest populated eigenvalue so the largest
        // factor is 1; the prefactor cancels in the normalization.
        let mut closest: Option<T> = None;
        for (i, a) in amps.iter().enumerate() {
            if a.norm_sqr() > T::zero() {
                let d = (eig[i % p] - n).abs();
                closest = Some(closest.map_or(d, |c: T| c.min(d)));
            }
        }
        let closest = closest.ok_or(Error::ZeroNorm)?;
        let shift = half_b * closest * closest;
        let out = amps.map_with_location(|i, _, a| {
            let d = eig[i % p] - n;
            a.scale((shift - half_b * d * d).exp())
        });
        StateVector::from_amplitudes(state.basis().clone(), out)
    }

    /// Samples the pointer value (two-stage: eigenvalue by weight, then
    /// `Normal(nu, 1/(2b))`) and applies the collapse.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        state: &StateVector<T>,
        cell: usize,
        time: T,
        rng: &mut R,
    ) -> Result<(StateVector<T>, CollapseEvent<T>)> {
        self.check_state(state, cell)?;
        let p = self.basis.photon_dim();
        let amps = state.amplitudes();
        let total = amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
        let u: f64 = rng.random();
        let target = T::lit(u) * total;
        let mut acc = T::zero();
        let mut chosen = None;
        for (i, a) in amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == T::zero() {
                continue;
            }
            acc += w;
            chosen = Some(i);
            if acc > target {
                break;
            }
        }
        let chosen = chosen.ok_or(Error::ZeroNorm)?;
        let nu = self.eigenvalues[cell][chosen % p];
        let z: f64 = StandardNormal.sample(rng);
        let sigma = (T::one() / (T::lit(2.0) * self.params.b)).sqrt();
        let n = nu + sigma * T::lit(z);

        let event = CollapseEvent {
            time,
            cell_index: cell,
            outcome_n: n,
            pre_norm_weights: self.eigen_weights(state, cell),
        };
        let next = self.collapse_with_outcome(state, cell, n)?;
        Ok((next, event))
    }
}

/// One-shot collapse centred on `cell`, building `N(a, x)` on the fly.
pub fn apply_collapse<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    cell: usize,
    params: &CollapseParams<T>,
    time: T,
    rng: &mut R,
) -> Result<(StateVector<T>, CollapseEvent<T>)> {
    CollapseModel::new(state.basis().clone(), *params)?.apply(state, cell, time, rng)
}
