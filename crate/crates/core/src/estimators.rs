//! Closed-form order-of-magnitude estimators for photon-collapse effects.
//!
//! Everything here is SI and `f64`. Reference figures enter only as targets
//! with explicit tolerances inside [`EstimateRecord`]; none of the formulas
//! contain them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::constants::{PLANCK, SPEED_OF_LIGHT};

/// Default cutoff for "faster than perception".
pub const PERCEPTION_TIME: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorInputs {
    /// W m^-2.
    pub irradiance: f64,
    /// Hz.
    pub mean_photon_frequency: f64,
    /// m.
    pub cell_size: f64,
    /// Collapse events per cell per second, `mu * V_cell`.
    pub mu_cell: f64,
    /// Edge of the grain cross-section, m.
    pub grain_size: f64,
    /// m.
    pub shadow_length: f64,
    /// Fraction of ambient photons missing from a shadowed cell.
    pub deficit: f64,
    /// Ambient photons per cell.
    pub ambient_occupancy: f64,
    /// Collapse resolution `b`.
    pub resolution: f64,
    /// Interferometer arm length, m.
    pub path_length: f64,
    pub n_photons: u32,
    /// Boson-sampling flight time, s.
    pub flight_time: f64,
    /// Multiplier on the naive boson-sampling product.
    pub anomaly_factor: f64,
    /// Optical band (Hz, Hz).
    pub spectrum_band: (f64, f64),
    /// s.
    pub perception_time: f64,
}

impl Default for EstimatorInputs {
    fn default() -> Self {
        Self {
            irradiance: 440.0,
            mean_photon_frequency: 5.5e14,
            cell_size: 1e-4,
            mu_cell: 1.0,
            grain_size: 1e-4,
            shadow_length: 1.0,
            deficit: 1.0 / 3.0,
            ambient_occupancy: 3.0,
            resolution: 4.0,
            path_length: 1.0,
            n_photons: 25,
            flight_time: 1e-8,
            anomaly_factor: 1.0,
            spectrum_band: (4e14, 8e14),
            perception_time: PERCEPTION_TIME,
        }
    }
}

impl EstimatorInputs {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 13] = [
            ("irradiance", self.irradiance, true),
            ("mean_photon_frequency", self.mean_photon_frequency, false),
            ("cell_size", self.cell_size, false),
            ("mu_cell", self.mu_cell, true),
            ("grain_size", self.grain_size, false),
            ("shadow_length", self.shadow_length, false),
            ("deficit", self.deficit, true),
            ("ambient_occupancy", self.ambient_occupancy, true),
            ("resolution", self.resolution, false),
            ("path_length", self.path_length, true),
            ("flight_time", self.flight_time, true),
            ("anomaly_factor", self.anomaly_factor, true),
            ("perception_time", self.perception_time, false),
        ];
        for (name, v, zero_ok) in checks {
            let ok = v.is_finite() && if zero_ok { v >= 0.0 } else { v > 0.0 };
            if !ok {
                return Err(invalid(
                    name,
                    if zero_ok {
                        "must be non-negative"
                    } else {
                        "must be positive"
                    },
                ));
            }
        }
        if self.deficit > 1.0 {
            return Err(invalid("deficit", "must not exceed 1"));
        }
        band_ratio(self.spectrum_band)?;
        Ok(())
    }

    /// `mu` in events m^-3 s^-1 for the configured cell size.
    pub fn mu(&self) -> f64 {
        self.mu_cell / self.cell_size.powi(3)
    }

    fn echo(&self) -> BTreeMap<String, f64> {
        [
            ("irradiance", self.irradiance),
            ("mean_photon_frequency", self.mean_photon_frequency),
            ("cell_size", self.cell_size),
            ("mu_cell", self.mu_cell),
            ("mu", self.mu()),
            ("grain_size", self.grain_size),
            ("shadow_length", self.shadow_length),
            ("deficit", self.deficit),
            ("ambient_occupancy", self.ambient_occupancy),
            ("resolution", self.resolution),
            ("path_length", self.path_length),
            ("n_photons", self.n_photons as f64),
            ("flight_time", self.flight_time),
            ("anomaly_factor", self.anomaly_factor),
            ("band_min", self.spectrum_band.0),
            ("band_max", self.spectrum_band.1),
            ("perception_time", self.perception_time),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Photon number density of a beam, `(I / c) / (h nu)`, in m^-3.
pub fn sunlight_photon_density(irradiance: f64, mean_photon_frequency: f64) -> f64 {
    irradiance / SPEED_OF_LIGHT / (PLANCK * mean_photon_frequency)
}

/// Expected photons in a cube of side `cell_size`.
pub fn photons_per_cell(density: f64, cell_size: f64) -> f64 {
    density * cell_size.powi(3)
}

/// Cells in a shadow one grain cross-section wide.
pub fn shadow_cells(inputs: &EstimatorInputs) -> f64 {
    let across = (inputs.grain_size / inputs.cell_size).max(1.0);
    (inputs.shadow_length / inputs.cell_size) * across * across
}

/// `1 - exp(-(b/4) (deficit * ambient)^2)`, capped at 1.
pub fn shadow_distinguishability(inputs: &EstimatorInputs) -> f64 {
    let dn = inputs.deficit * inputs.ambient_occupancy;
    (1.0 - (-inputs.resolution / 4.0 * dn * dn).exp()).clamp(0.0, 1.0)
}

/// `1 / (mu_cell * N_shadow * distinguishability)`; infinite when the shadow
/// leaves no record or no collapses occur.
pub fn dust_grain_collapse_time(inputs: &EstimatorInputs) -> f64 {
    let rate = inputs.mu_cell * shadow_cells(inputs) * shadow_distinguishability(inputs);
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// Chance that an interferometer photon suffers a collapse during its flight,
/// `mu_cell * L / c`.
pub fn mz_anomaly_probability(inputs: &EstimatorInputs) -> f64 {
    inputs.mu_cell * inputs.path_length / SPEED_OF_LIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosonSamplingEstimate {
    /// `n * mu_cell * t_flight`.
    pub naive: f64,
    /// `naive * anomaly_factor`.
    pub probability: f64,
    /// Factor needed for `naive` to reach `target`.
    pub implied_multiplier: Option<f64>,
}

pub fn boson_sampling_anomaly(inputs: &EstimatorInputs, target: Option<f64>) -> BosonSamplingEstimate {
    let naive = inputs.n_photons as f64 * inputs.mu_cell * inputs.flight_time;
    BosonSamplingEstimate {
        naive,
        probability: naive * inputs.anomaly_factor,
        implied_multiplier: target.filter(|_| naive > 0.0).map(|t| t / naive),
    }
}

fn band_ratio((lo, hi): (f64, f64)) -> Result<f64> {
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(invalid("spectrum_band", "frequencies must be positive"));
    }
    if hi < lo {
        return Err(invalid("spectrum_band", "band must be ordered (low, high)"));
    }
    Ok(hi / lo)
}

/// Strength of the energy-density model relative to the number model.
///
/// The energy model resolves `h nu_max` where the number model resolves one
/// photon of the lowest band frequency; the headline factor is
/// `nu_max / nu_min`.
pub fn energy_model_factor(spectrum_band: (f64, f64)) -> Result<f64> {
    band_ratio(spectrum_band)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perception {
    Consistent,
    Inconsistent,
}

/// Consistent iff `collapse_time < threshold` (strict).
pub fn perception_consistency(collapse_time: f64, threshold: f64) -> Perception {
    if collapse_time < threshold {
        Perception::Consistent
    } else {
        Perception::Inconsistent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Within `target / f ..= target * f`.
    Factor(f64),
    /// At most `target * (1 + eps)`.
    AtMost(f64),
}

impl Tolerance {
    pub fn accepts(&self, output: f64, target: f64) -> bool {
        match *self {
            Tolerance::Factor(f) => output >= target / f && output <= target * f,
            Tolerance::AtMost(eps) => output <= target * (1.0 + eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The formula disagrees with the target by a documented, unexplained
    /// factor; reported rather than failed.
    Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub unit: String,
    pub inputs: BTreeMap<String, f64>,
    pub output: f64,
    pub target: f64,
    pub tolerance: Tolerance,
    pub status: Status,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Reference figures the estimators are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Targets {
    /// m^-3.
    pub photon_density: f64,
    pub photons_per_cell: f64,
    /// s.
    pub dust_grain_time: f64,
    pub mz_probability: f64,
    pub boson_sampling_probability: f64,
    pub energy_factor: f64,
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            photon_density: 3e12,
            photons_per_cell: 3.0,
            dust_grain_time: 1e-4,
            mz_probability: 3e-9,
            boson_sampling_probability: 4e-6,
            energy_factor: 2.0,
        }
    }
}

fn record(
    name: &str,
    unit: &str,
    inputs: &BTreeMap<String, f64>,
    keys: &[&str],
    output: f64,
    target: f64,
    tolerance: Tolerance,
) -> EstimateRecord {
    EstimateRecord {
        name: name.into(),
        unit: unit.into(),
        inputs: keys
            .iter()
            .filter_map(|k| inputs.get(*k).map(|v| (k.to_string(), *v)))
            .collect(),
        output,
        target,
        tolerance,
        status: if tolerance.accepts(output, target) {
            Status::Pass
        } else {
            Status::Fail
        },
        details: BTreeMap::new(),
        note: None,
    }
}

/// The six headline estimates with their targets and verdicts.
pub fn headline_estimates(inputs: &EstimatorInputs, targets: &Targets) -> Result<Vec<EstimateRecord>> {
    inputs.validate()?;
    let echo = inputs.echo();
    let order = Tolerance::Factor(3.0);
    let density = sunlight_photon_density(inputs.irradiance, inputs.mean_photon_frequency);

    let mut out = Vec::with_capacity(6);
    let mut r = record(
        "sunlight_photon_density",
        "m^-3",
        &echo,
        &["irradiance", "mean_photon_frequency"],
        density,
        targets.photon_density,
        order,
    );
    r.details.insert("per_cm3".into(), density * 1e-6);
    out.push(r);

    out.push(record(
        "photons_per_cell",
        "1",
        &echo,
        &["irradiance", "mean_photon_frequency", "cell_size"],
        photons_per_cell(density, inputs.cell_size),
        targets.photons_per_cell,
        order,
    ));

    let t = dust_grain_collapse_time(inputs);
    let mut r = record(
        "dust_grain_collapse_time",
        "s",
        &echo,
        &[
            "mu_cell",
            "cell_size",
            "grain_size",
            "shadow_length",
            "deficit",
            "ambient_occupancy",
            "resolution",
            "perception_time",
        ],
        t,
        targets.dust_grain_time,
        order,
    );
    r.details.insert("shadow_cells".into(), shadow_cells(inputs));
    r.details
        .insert("distinguishability".into(), shadow_distinguishability(inputs));
    let perceived = perception_consistency(t, inputs.perception_time);
    r.details.insert(
        "perception_consistent".into(),
        f64::from(u8::from(perceived == Perception::Consistent)),
    );
    if t.is_infinite() {
        r.note = Some("censored: the shadow leaves no distinguishable record".into());
    }
    if perceived == Perception::Inconsistent {
        r.status = Status::Fail;
    }
    out.push(r);

    out.push(record(
        "mz_anomaly_probability",
        "1",
        &echo,
        &["mu_cell", "path_length"],
        mz_anomaly_probability(inputs),
        targets.mz_probability,
        Tolerance::Factor(2.0),
    ));

    let boson = boson_sampling_anomaly(inputs, Some(targets.boson_sampling_probability));
    let mut r = record(
        "boson_sampling_anomaly",
        "1",
        &echo,
        &["n_photons", "mu_cell", "flight_time", "anomaly_factor"],
        boson.probability,
        targets.boson_sampling_probability,
        order,
    );
    r.details.insert("naive".into(), boson.naive);
    if let Some(m) = boson.implied_multiplier {
        r.details.insert("implied_multiplier".into(), m);
    }
    if r.status == Status::Fail {
        r.status = Status::Discrepancy;
        r.note = Some(format!(
            "naive product n * mu_cell * t_flight = {:.3e}; reaching the target needs a factor {:.1}",
            boson.naive,
            boson.implied_multiplier.unwrap_or(f64::NAN)
        ));
    }
    out.push(r);

    out.push(record(
        "energy_model_factor",
        "1",
        &echo,
        &["band_min", "band_max"],
        energy_model_factor(inputs.spectrum_band)?,
        targets.energy_factor,
        Tolerance::AtMost(1e-12),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_density() {
        let n = sunlight_photon_density(1000.0, 5.5e14);
        let by_hand = 1000.0 / 299_792_458.0 / (6.626_070_15e-34 * 5.5e14);
        assert!((n - by_hand).abs() / by_hand < 1e-15);
        assert!((n / 9.153e12 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kernel_arithmetic_for_one_photon_deficit() {
        let sharp = EstimatorInputs {
            resolution: 1e6,
            ..Default::default()
        };
        let soft = EstimatorInputs::default();
        let ratio = dust_grain_collapse_time(&soft) / dust_grain_collapse_time(&sharp);
        assert!((ratio - 1.0 / (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((dust_grain_collapse_time(&sharp) - 1e-4).abs() < 1e-15);
    }
}
