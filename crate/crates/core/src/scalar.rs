//! Scalar abstraction shared by every numerical module.
//!
//! All operator algebra is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Complex amplitudes are `num_complex::Complex<T>`.

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Complex amplitude over a real scalar.
pub type Cx<T> = num_complex::Complex<T>;

/// Floating point scalar usable by the simulation engine.
pub trait Real:
    RealField
    + Copy
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

#[inline]
pub(crate) fn cre<T: Real>(re: T) -> Cx<T> {
    Cx::new(re, T::zero())
}

/// `exp(-i * phase)`.
#[inline]
pub(crate) fn phase_neg<T: Real>(phase: T) -> Cx<T> {
    Cx::new(phase.cos(), -phase.sin())
}

/// SI physical constants used at the estimator and unit-conversion boundary.
pub mod constants {
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Neutron mass, kg.
    pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;

    /// Mass in kg expressed as an inverse length (m^-1), i.e. `m c / hbar`.
    pub fn mass_to_inverse_length(mass_kg: f64) -> f64 {
        mass_kg * SPEED_OF_LIGHT / HBAR
    }
}
