//! Photon-only dynamical collapse models on a truncated Fock space.
//!
//! The crate evolves photon states (optionally entangled with a finite matter
//! factor) under a discrete Gaussian collapse process on the smeared photon
//! number and under continuous number- and energy-density CSL master
//! equations, models a two-branch matter system localized through photon
//! shadows, and provides closed-form order-of-magnitude estimators.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collapse;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod lattice;
pub mod master;
pub mod operators;
pub mod propagate;
pub mod rng;
pub mod scalar;
pub mod shadow;
pub mod sparse;
pub mod trajectory;

pub use collapse::{CollapseEvent, CollapseModel, CollapseParams};
pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockBasis, StateVector};
pub use lattice::ModeLattice;
pub use master::{Dissipator, EvolutionResult};
pub use propagate::Propagator;
pub use scalar::{Cx, Real};
pub use sparse::SparseOperator;

pub type ModeLattice64 = ModeLattice<f64>;
pub type FockBasis64 = FockBasis<f64>;
pub type StateVector64 = StateVector<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type SparseOperator64 = SparseOperator<f64>;
pub type CollapseParams64 = CollapseParams<f64>;
pub type CollapseModel64 = CollapseModel<f64>;
pub type Dissipator64 = Dissipator<f64>;
pub type EvolutionResult64 = EvolutionResult<f64>;
pub type ShadowExperiment64 = shadow::ShadowExperiment<f64>;

pub type ModeLattice32 = ModeLattice<f32>;
pub type FockBasis32 = FockBasis<f32>;
pub type StateVector32 = StateVector<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type SparseOperator32 = SparseOperator<f32>;
pub type CollapseParams32 = CollapseParams<f32>;
pub type CollapseModel32 = CollapseModel<f32>;
pub type Dissipator32 = Dissipator<f32>;
pub type EvolutionResult32 = EvolutionResult<f32>;
pub type ShadowExperiment32 = shadow::ShadowExperiment<f32>;
