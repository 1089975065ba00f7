//! Density-matrix evolution under the number- and energy-density CSL
//! equations and under the exact ensemble average of the discrete collapse
//! process.
//!
//! All three dissipators share the double-commutator shape
//!
//! ```text
//! D(rho) = -rate * sum_{x,x'} G(x,x') [A_x, [A_x', rho]]
//! ```
//!
//! with spatial integrals replaced by cell sums. Under `xi(x_i) = a_i / s^(d/2)`
//! the two cell-volume factors cancel the field normalization, so the
//! generators are the mode operators themselves: `n_x` for the number model
//! and `(K^1/2 a)_x^dagger (K^1/2 a)_x` for the energy model.
//!
//! The ensemble-averaged discrete process dephases coherences between
//! `N(a, x)` eigenvalues `nu`, `nu'` at rate
//! `mu V_cell (1 - exp(-(b/4)(nu - nu')^2))` per centre. For
//! `b (nu - nu')^2 << 1` this is the double-commutator form with
//! `lambda_eff = mu V_cell b / 4` and a diagonal kernel.

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::collapse::{CollapseModel, CollapseParams};
use crate::error::{invalid, Error, Result};
use crate::fock::{hermiticity_deviation, min_eigenvalue, DensityMatrix, FockBasis};
use crate::operators::{half_k_field_op, number_op};
use crate::propagate::check_hermitian;
use crate::scalar::{constants, cre, Cx, Real};
use crate::sparse::SparseOperator;
use crate::trajectory::TrajectorySimulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorKind {
    None,
    NumberCsl,
    EnergyCsl,
    GrwAverage,
}

#[derive(Debug, Clone)]
pub struct Dissipator<T: Real> {
    kind: DissipatorKind,
    dim: usize,
    operators: Vec<SparseOperator<T>>,
    kernel: DMatrix<T>,
    rate: T,
    /// `Gamma` with `D(rho)_ij = -Gamma_ij rho_ij`, when every generator is
    /// diagonal in the occupation basis.
    dephasing: Option<DMatrix<T>>,
    /// `B_x = sum_x' G(x,x') A_x'` for the general path.
    smeared: Vec<SparseOperator<T>>,
}

/// `G(x, x') = exp(-d(x,x')^2 / 4a^2)` over cell pairs.
pub fn csl_kernel<T: Real>(basis: &FockBasis<T>, a: T) -> DMatrix<T> {
    let lattice = basis.lattice();
    let n = lattice.cell_count();
    let four_a2 = T::lit(4.0) * a * a;
    DMatrix::from_fn(n, n, |i, j| (-lattice.distance_sq(i, j) / four_a2).exp())
}

/// Rejects kernels with a negative eigenvalue. On a small periodic lattice
/// the minimal-image Gaussian is indefinite once `a` approaches the ring
/// size, and the resulting generator is not completely positive.
fn check_kernel<T: Real>(kernel: &DMatrix<T>) -> Result<()> {
    if kernel.nrows() < 2 {
        return Ok(());
    }
    let eig = kernel.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min < -T::lit(1e-12) * max {
        return Err(invalid(
            "a",
            format!(
                "CSL kernel on this lattice has eigenvalue {:e}; reduce a or enlarge the lattice",
                min.as_f64()
            ),
        ));
    }
    Ok(())
}

fn check_basis_params<T: Real>(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<()> {
    params.validate()?;
    if basis.dim() == 0 {
        return Err(invalid("basis", "empty basis"));
    }
    Ok(())
}

impl<T: Real> Dissipator<T> {
    /// No dissipation: pure Hamiltonian evolution.
    pub fn none(dim: usize) -> Self {
        Self {
            kind: DissipatorKind::None,
            dim,
            operators: Vec::new(),
            kernel: DMatrix::zeros(0, 0),
            rate: T::zero(),
            dephasing: Some(DMatrix::zeros(dim, dim)),
            smeared: Vec::new(),
        }
    }

    fn assemble(
        kind: DissipatorKind,
        dim: usize,
        operators: Vec<SparseOperator<T>>,
        kernel: DMatrix<T>,
        rate: T,
    ) -> Result<Self> {
        for op in &operators {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
        }
        let diagonal = operators.iter().all(SparseOperator::is_diagonal);
        let dephasing = if diagonal {
            let diags: Vec<Vec<T>> = operators.iter().map(|op| op.real_diagonal()).collect::<Result<_>>()?;
            let n = operators.len();
            Some(DMatrix::from_fn(dim, dim, |i, j| {
                let mut g = T::zero();
                for x in 0..n {
                    let dx = diags[x][i] - diags[x][j];
                    if dx == T::zero() {
                        continue;
                    }
                    for y in 0..n {
                        g += kernel[(x, y)] * dx * (diags[y][i] - diags[y][j]);
                    }
                }
                rate * g
            }))
        } else {
            None
        };
        let smeared = if diagonal {
            Vec::new()
        } else {
            (0..operators.len())
                .map(|x| {
                    operators
                        .iter()
                        .enumerate()
                        .try_fold(SparseOperator::zero(dim), |acc, (y, op)| {
                            acc.add(&op.scale(cre(kernel[(x, y)])))
                        })
                })
                .collect::<Result<_>>()?
        };
        Ok(Self {
            kind,
            dim,
            operators,
            kernel,
            rate,
            dephasing,
            smeared,
        })
    }

    /// Photon-number CSL: generators `n_x`, kernel `G`, rate `lambda`.
    pub fn number_csl(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Self> {
        check_basis_params(basis, params)?;
        let kernel = csl_kernel(basis, params.a);
        check_kernel(&kernel)?;
        let ops = (0..basis.cells()).map(|c| number_op(basis, c)).collect::<Result<_>>()?;
        Self::assemble(DissipatorKind::NumberCsl, basis.dim(), ops, kernel, params.lambda_csl)
    }

    /// Photon energy-density CSL: generators
    /// `(K^1/2 a)_x^dagger (K^1/2 a)_x` (units of m^-1) and rate
    /// `lambda / (2 M^2)` with `M = m_n c / hbar` in m^-1.
    pub fn energy_csl(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Self> {
        check_basis_params(basis, params)?;
        let kernel = csl_kernel(basis, params.a);
        check_kernel(&kernel)?;
        let ops = (0..basis.cells())
            .map(|c| {
                let f = half_k_field_op(basis, c)?;
                f.adjoint().mul(&f)
            })
            .collect::<Result<Vec<_>>>()?;
        let mass = T::lit(constants::mass_to_inverse_length(params.m_n.as_f64()));
        let rate = params.lambda_csl / (T::lit(2.0) * mass * mass);
        Self::assemble(DissipatorKind::EnergyCsl, basis.dim(), ops, kernel, rate)
    }

    /// Exact generator of the ensemble-averaged discrete collapse process,
    /// `rho' = sum_x mu V_cell (int dn L_n rho L_n - rho)`.
    pub fn grw_average(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Self> {
        check_basis_params(basis, params)?;
        let model = CollapseModel::new(std::sync::Arc::new(basis.clone()), *params)?;
        Self::grw_average_for(&model)
    }

    /// [`Dissipator::grw_average`] for an existing model, honouring its rate
    /// multiplier.
    pub fn grw_average_for(model: &CollapseModel<T>) -> Result<Self> {
        let basis = model.basis();
        let params = model.params();
        let dim = basis.dim();
        let p = basis.photon_dim();
        let cells = basis.cells();
        let rate = params.mu_cell(basis.lattice()) * model.rate_multiplier();
        let quarter_b = params.b * T::lit(0.25);
        let ops: Vec<SparseOperator<T>> = (0..cells)
            .map(|c| SparseOperator::from_diagonal((0..dim).map(|i| cre(model.eigenvalues(c)[i % p])).collect()))
            .collect();
        let gamma = DMatrix::from_fn(dim, dim, |i, j| {
            let mut g = T::zero();
            for c in 0..cells {
                let eig = model.eigenvalues(c);
                let d = eig[i % p] - eig[j % p];
                if d != T::zero() {
                    g += T::one() - (-quarter_b * d * d).exp();
                }
            }
            rate * g
        });
        Ok(Self {
            kind: DissipatorKind::GrwAverage,
            dim,
            operators: ops,
            kernel: DMatrix::identity(cells, cells),
            rate,
            dephasing: Some(gamma),
            smeared: Vec::new(),
        })
    }

    pub fn kind(&self) -> DissipatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[SparseOperator<T>] {
        &self.operators
    }

    pub fn kernel(&self) -> &DMatrix<T> {
        &self.kernel
    }

    /// Overall prefactor (`lambda`, `lambda / 2M^2` or `mu V_cell`).
    pub fn rate(&self) -> T {
        self.rate
    }

    /// Rate multiplying `[A_x, [A_x, rho]]` for a single isolated centre,
    /// `rate * G(x, x)`.
    pub fn single_cell_rate(&self) -> T {
        if self.kernel.nrows() == 0 {
            return T::zero();
        }
        self.rate * self.kernel[(0, 0)]
    }

    /// Pairwise dephasing rates when every generator is diagonal.
    pub fn dephasing_rates(&self) -> Option<&DMatrix<T>> {
        self.dephasing.as_ref()
    }

    /// `D(rho)`.
    pub fn apply(&self, rho: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        if let Some(gamma) = &self.dephasing {
            return DMatrix::from_fn(self.dim, self.dim, |i, j| rho[(i, j)].scale(-gamma[(i, j)]));
        }
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (a, b) in self.operators.iter().zip(&self.smeared) {
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let inner = b.commutator_dense(rho);
            out -= a.commutator_dense(&inner);
        }
        let r = self.rate;
        out.iter_mut().for_each(|v| *v = v.scale(r));
        out
    }
}

/// Number-CSL dissipator.
pub fn build_number_csl<T: Real>(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Dissipator<T>> {
    Dissipator::number_csl(basis, params)
}

/// Energy-density CSL dissipator.
pub fn build_energy_csl<T: Real>(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Dissipator<T>> {
    Dissipator::energy_csl(basis, params)
}

/// Ensemble-average generator of the discrete process.
pub fn build_grw_average<T: Real>(basis: &FockBasis<T>, params: &CollapseParams<T>) -> Result<Dissipator<T>> {
    Dissipator::grw_average(basis, params)
}

/// Limits checked on every sample of an evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HygieneTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl Default for HygieneTolerances {
    fn default() -> Self {
        Self {
            trace: 1e-9,
            hermiticity: 1e-10,
            min_eigenvalue: -1e-8,
        }
    }
}

/// Per-sample health of an evolution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace_deviation: Vec<f64>,
    pub hermiticity_deviation: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub min_eigenvalue: Vec<f64>,
    /// Smallest RK4 step used in each sample interval.
    pub step_sizes: Vec<f64>,
    pub halvings: usize,
}

impl Diagnostics {
    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_hermiticity_deviation(&self) -> f64 {
        self.hermiticity_deviation.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn lowest_eigenvalue(&self) -> Option<f64> {
        self.min_eigenvalue.iter().copied().reduce(f64::min)
    }

    pub fn within(&self, tol: &HygieneTolerances) -> bool {
        self.max_trace_deviation() < tol.trace
            && self.max_hermiticity_deviation() < tol.hermiticity
            && self.lowest_eigenvalue().is_none_or(|m| m >= tol.min_eigenvalue)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub diagnostics: Diagnostics,
}

impl<T: Real> EvolutionResult<T> {
    pub fn passed(&self, tol: &HygieneTolerances) -> bool {
        self.diagnostics.within(tol)
    }

    /// `|rho_ij(t)|` over all samples.
    pub fn coherence_series(&self, (i, j): (usize, usize)) -> Result<Vec<T>> {
        self.states
            .iter()
            .map(|s| {
                if i >= s.dim() || j >= s.dim() {
                    return Err(Error::IndexOutOfBounds {
                        what: "density matrix",
                        index: i.max(j),
                        len: s.dim(),
                    });
                }
                Ok(s.matrix()[(i, j)].modulus())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions<T> {
    /// Nominal RK4 step.
    pub dt: T,
    /// Output times, non-decreasing, starting at or after 0.
    pub sample_times: Vec<T>,
    pub check_positivity: bool,
    /// Per-step trace drift that triggers step halving.
    pub halving_threshold: f64,
    pub max_halvings: u32,
    /// Cumulative trace drift that aborts the run.
    pub abort_trace_deviation: f64,
}

impl<T: Real> EvolveOptions<T> {
    pub fn new(dt: T, sample_times: Vec<T>) -> Self {
        Self {
            dt,
            sample_times,
            check_positivity: true,
            halving_threshold: 1e-10,
            max_halvings: 8,
            abort_trace_deviation: 1e-6,
        }
    }
}

struct Generator<'a, T: Real> {
    hamiltonian: &'a SparseOperator<T>,
    dissipator: &'a Dissipator<T>,
}

impl<T: Real> Generator<'_, T> {
    fn apply(&self, rho: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        let mut out = self.dissipator.apply(rho);
        if !self.hamiltonian.is_zero() {
            let comm = self.hamiltonian.commutator_dense(rho);
            let minus_i = Cx::new(T::zero(), -T::one());
            out += comm.map(|v| v * minus_i);
        }
        out
    }

    fn rk4(&self, rho: &DMatrix<Cx<T>>, h: T) -> DMatrix<Cx<T>> {
        let half = h * T::lit(0.5);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + k1.map(|v| v.scale(half))));
        let k3 = self.apply(&(rho + k2.map(|v| v.scale(half))));
        let k4 = self.apply(&(rho + k3.map(|v| v.scale(h))));
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        rho + (k1 + k2.map(|v| v.scale(two)) + k3.map(|v| v.scale(two)) + k4).map(|v| v.scale(sixth))
    }

    /// One step of size `h`, halved recursively while the trace drifts by
    /// more than `threshold`.
    fn step(
        &self,
        rho: &DMatrix<Cx<T>>,
        h: T,
        threshold: f64,
        depth_left: u32,
        smallest: &mut T,
        halvings: &mut usize,
    ) -> DMatrix<Cx<T>> {
        let next = self.rk4(rho, h);
        let drift = (next.trace() - rho.trace()).modulus().as_f64();
        if drift > threshold && depth_left > 0 {
            *halvings += 1;
            let half = h * T::lit(0.5);
            let mid = self.step(rho, half, threshold, depth_left - 1, smallest, halvings);
            return self.step(&mid, half, threshold, depth_left - 1, smallest, halvings);
        }
        if h < *smallest {
            *smallest = h;
        }
        next
    }
}

/// Integrates `rho' = -i[H, rho] + D(rho)` with fixed-step RK4, sampling at
/// every multiple of `dt` up to `t_final`.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    hamiltonian: &SparseOperator<T>,
    dissipator: &Dissipator<T>,
    t_final: T,
    dt: T,
) -> Result<EvolutionResult<T>> {
    if !(dt > T::zero()) || !(t_final > T::zero()) {
        return Err(invalid("dt", "dt and t_final must be positive"));
    }
    let steps = (t_final / dt).as_f64().ceil().max(1.0) as usize;
    let times = (0..=steps).map(|k| t_final * T::count(k) / T::count(steps)).collect();
    evolve_with(rho0, hamiltonian, dissipator, &EvolveOptions::new(dt, times))
}

/// [`evolve`] with explicit sample times and options. Each interval between
/// samples is split into equal steps no longer than `dt`.
pub fn evolve_with<T: Real>(
    rho0: &DensityMatrix<T>,
    hamiltonian: &SparseOperator<T>,
    dissipator: &Dissipator<T>,
    options: &EvolveOptions<T>,
) -> Result<EvolutionResult<T>> {
    let dim = rho0.dim();
    for found in [hamiltonian.dim(), dissipator.dim()] {
        if found != dim {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
    }
    check_hermitian(hamiltonian)?;
    if !(options.dt > T::zero()) || !options.dt.is_finite() {
        return Err(invalid("dt", "must be positive and finite"));
    }
    let mut last = T::zero();
    for &t in &options.sample_times {
        if t < last || !t.is_finite() {
            return Err(invalid("sample_times", "must be non-negative and non-decreasing"));
        }
        last = t;
    }

    let generator = Generator {
        hamiltonian,
        dissipator,
    };
    let trace0 = rho0.trace();
    let mut rho = rho0.matrix().clone();
    let mut t = T::zero();
    let mut result = EvolutionResult {
        times: Vec::with_capacity(options.sample_times.len()),
        states: Vec::with_capacity(options.sample_times.len()),
        diagnostics: Diagnostics::default(),
    };

    for &target in &options.sample_times {
        let span = target - t;
        let mut smallest = span;
        if span > T::zero() {
            let n = (span / options.dt).as_f64().ceil().max(1.0) as usize;
            let h = span / T::count(n);
            for _ in 0..n {
                rho = generator.step(
                    &rho,
                    h,
                    options.halving_threshold,
                    options.max_halvings,
                    &mut smallest,
                    &mut result.diagnostics.halvings,
                );
            }
            t = target;
        }

        let trace = rho.trace();
        let drift = (trace - trace0).modulus().as_f64();
        let finite = rho.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite || drift > options.abort_trace_deviation {
            return Err(Error::IntegrationFailed {
                time: t.as_f64(),
                reason: if finite {
                    format!("trace drifted by {drift:e}")
                } else {
                    "non-finite density matrix".into()
                },
            });
        }
        let d = &mut result.diagnostics;
        d.trace_deviation.push((trace - cre(T::one())).modulus().as_f64());
        d.hermiticity_deviation.push(hermiticity_deviation(&rho).as_f64());
        if options.check_positivity {
            d.min_eigenvalue.push(min_eigenvalue(&rho).as_f64());
        }
        d.step_sizes.push(smallest.as_f64());
        result.times.push(target);
        result
            .states
            .push(DensityMatrix::new(rho0.basis().clone(), rho.clone())?);
    }
    Ok(result)
}

/// Threshold below which a decay fit is flagged as non-exponential.
pub const MIN_R_SQUARED: f64 = 0.99;

/// Least-squares fit of `log |rho_ij(t)| = intercept - rate * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual: f64,
    pub exponential: bool,
}

impl DecayFit {
    pub fn predict(&self, t: f64) -> f64 {
        (self.intercept - self.rate * t).exp()
    }
}

pub fn fit_decay(times: &[f64], magnitudes: &[f64]) -> Result<DecayFit> {
    if times.len() != magnitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: magnitudes.len(),
        });
    }
    if times.len() < 3 {
        return Err(Error::FitRejected {
            reason: format!("need at least 3 samples, got {}", times.len()),
        });
    }
    if let Some(bad) = magnitudes.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(Error::FitRejected {
            reason: format!("magnitude {bad} has no logarithm"),
        });
    }
    let n = times.len() as f64;
    let ys: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRejected {
            reason: "all samples at the same time".into(),
        });
    }
    let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let residual: f64 = times
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let total: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let r_squared = if total <= f64::EPSILON * scale * scale * n {
        if residual <= f64::EPSILON * scale * scale * n {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - residual / total
    };
    Ok(DecayFit {
        rate: -slope,
        intercept,
        r_squared,
        residual,
        exponential: r_squared >= MIN_R_SQUARED,
    })
}

/// Exponential decay rate of `|rho_ij(t)|` across an evolution.
pub fn decoherence_rate<T: Real>(result: &EvolutionResult<T>, pair: (usize, usize)) -> Result<DecayFit> {
    let mags: Vec<f64> = result.coherence_series(pair)?.into_iter().map(Real::as_f64).collect();
    let times: Vec<f64> = result.times.iter().map(|t| t.as_f64()).collect();
    fit_decay(&times, &mags)
}

/// `time,abs_rho,fit` rows for a decay fit.
pub fn decay_csv<T: Real>(result: &EvolutionResult<T>, pair: (usize, usize), fit: &DecayFit) -> Result<String> {
    let mags = result.coherence_series(pair)?;
    let mut out = String::from("time,abs_rho,fit\n");
    for (t, m) in result.times.iter().zip(mags) {
        let t = t.as_f64();
        out.push_str(&format!("{t:e},{:e},{:e}\n", m.as_f64(), fit.predict(t)));
    }
    Ok(out)
}

/// Monte Carlo band constant: the ensemble must agree within `C / sqrt(M)`.
pub const BAND_CONSTANT: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct CrossValidationConfig<T: Real> {
    pub model: CollapseModel<T>,
    pub hamiltonian: SparseOperator<T>,
    pub initial: crate::fock::StateVector<T>,
    pub sample_times: Vec<T>,
    pub dt: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub n_trajectories: usize,
    pub seed: u64,
    pub band_constant: f64,
    pub band: f64,
    pub times: Vec<f64>,
    /// Max-norm deviation between the ensemble mean and the master solution
    /// at each time.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub within_band: bool,
    pub master_diagnostics: Diagnostics,
}

/// Compares the trajectory ensemble mean with the ensemble-average master
/// equation without failing on disagreement.
pub fn cross_validation_report<T: Real>(
    config: &CrossValidationConfig<T>,
    n_trajectories: usize,
    seed: u64,
) -> Result<CrossValidationReport> {
    let t_final = config
        .sample_times
        .last()
        .copied()
        .filter(|t| *t > T::zero())
        .ok_or_else(|| invalid("sample_times", "need a positive final time"))?;
    let sim = TrajectorySimulator::new(config.model.clone(), &config.hamiltonian, t_final)?;
    let ensemble = sim.ensemble_density(&config.initial, &config.sample_times, n_trajectories, seed)?;

    let dissipator = Dissipator::grw_average_for(&config.model)?;
    let master = evolve_with(
        &config.initial.to_density(),
        &config.hamiltonian,
        &dissipator,
        &EvolveOptions::new(config.dt, config.sample_times.clone()),
    )?;

    let deviations: Vec<f64> = ensemble
        .iter()
        .zip(&master.states)
        .map(|(e, m)| (e - m.matrix()).iter().fold(0.0f64, |a, v| a.max(v.modulus().as_f64())))
        .collect();
    let max_deviation = deviations.iter().fold(0.0f64, |a, &b| a.max(b));
    let band = BAND_CONSTANT / (n_trajectories as f64).sqrt();
    Ok(CrossValidationReport {
        n_trajectories,
        seed,
        band_constant: BAND_CONSTANT,
        band,
        times: config.sample_times.iter().map(|t| t.as_f64()).collect(),
        deviations,
        max_deviation,
        within_band: max_deviation <= band,
        master_diagnostics: master.diagnostics,
    })
}

/// [`cross_validation_report`], failing when the deviation leaves the
/// Monte Carlo band.
pub fn cross_validate<T: Real>(
    config: &CrossValidationConfig<T>,
    n_trajectories: usize,
    seed: u64,
) -> Result<CrossValidationReport> {
    let report = cross_validation_report(config, n_trajectories, seed)?;
    if !report.within_band {
        return Err(Error::OutsideMonteCarloBand {
            deviation: report.max_deviation,
            band: report.band,
        });
    }
    Ok(report)
}
