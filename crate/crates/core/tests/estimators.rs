use photon_collapse::estimators::{
    boson_sampling_anomaly, dust_grain_collapse_time, energy_model_factor, headline_estimates, mz_anomaly_probability,
    perception_consistency, photons_per_cell, sunlight_photon_density, EstimatorInputs, Perception, Status, Targets,
    PERCEPTION_TIME,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sunlight_reproduction_recipe_is_within_a_factor_of_three() {
    let i = EstimatorInputs::default();
    let n = sunlight_photon_density(i.irradiance, i.mean_photon_frequency);
    let per_cm3 = n * 1e-6;
    assert!(per_cm3 > 1e6 && per_cm3 < 9e6, "{per_cm3:e}");
    assert_eq!(sunlight_photon_density(0.0, 5.5e14), 0.0);
}

#[test]
fn photons_per_cell_examples() {
    assert!(rel(photons_per_cell(3e12, 1e-4), 3.0) < 1e-12);
    assert_eq!(photons_per_cell(0.0, 1e-4), 0.0);
    assert!(rel(photons_per_cell(3e12, 2e-4), 8.0 * photons_per_cell(3e12, 1e-4)) < 1e-12);
}

#[test]
fn dust_grain_examples() {
    let sharp = EstimatorInputs {
        resolution: 1e3,
        ..Default::default()
    };
    assert!(rel(dust_grain_collapse_time(&sharp), 1e-4) < 1e-12);
    let t = dust_grain_collapse_time(&EstimatorInputs::default());
    assert!(t / 1e-4 < 3.0 && t / 1e-4 > 1.0 / 3.0);
    let none = EstimatorInputs {
        deficit: 0.0,
        ..Default::default()
    };
    assert!(dust_grain_collapse_time(&none).is_infinite());
}

#[test]
fn interferometer_examples() {
    let i = EstimatorInputs::default();
    let p = mz_anomaly_probability(&i);
    assert!(rel(p, 1.0 / 299_792_458.0) < 1e-12);
    assert!(p / 3e-9 < 2.0 && 3e-9 / p < 2.0);
    let off = EstimatorInputs {
        mu_cell: 0.0,
        ..i.clone()
    };
    assert_eq!(mz_anomaly_probability(&off), 0.0);
    let long = EstimatorInputs { path_length: 2.0, ..i };
    assert!(rel(mz_anomaly_probability(&long), 2.0 * p) < 1e-15);
}

#[test]
fn boson_sampling_reports_naive_product_and_implied_factor() {
    let i = EstimatorInputs::default();
    let e = boson_sampling_anomaly(&i, Some(4e-6));
    assert!(rel(e.naive, 2.5e-7) < 1e-12);
    assert!(rel(e.implied_multiplier.unwrap(), 16.0) < 1e-12);
    let none = EstimatorInputs { n_photons: 0, ..i };
    let e = boson_sampling_anomaly(&none, Some(4e-6));
    assert_eq!(e.probability, 0.0);
    assert!(e.implied_multiplier.is_none());
}

#[test]
fn energy_factor_examples() {
    assert_eq!(energy_model_factor((4e14, 8e14)).unwrap(), 2.0);
    assert_eq!(energy_model_factor((5e14, 5e14)).unwrap(), 1.0);
    assert_eq!(energy_model_factor((1.0, 4.0)).unwrap(), 4.0);
    assert!(energy_model_factor((8e14, 4e14)).is_err());
    assert!(energy_model_factor((0.0, 4e14)).is_err());
}

#[test]
fn perception_boundary_is_strict() {
    assert_eq!(perception_consistency(1e-4, PERCEPTION_TIME), Perception::Consistent);
    assert_eq!(perception_consistency(1.0, PERCEPTION_TIME), Perception::Inconsistent);
    assert_eq!(perception_consistency(1e-2, PERCEPTION_TIME), Perception::Inconsistent);
}

#[test]
fn headline_records() {
    let records = headline_estimates(&EstimatorInputs::default(), &Targets::default()).unwrap();
    let names: Vec<&str> = records.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "sunlight_photon_density",
            "photons_per_cell",
            "dust_grain_collapse_time",
            "mz_anomaly_probability",
            "boson_sampling_anomaly",
            "energy_model_factor"
        ]
    );
    for r in &records {
        let expected = if r.name == "boson_sampling_anomaly" {
            Status::Discrepancy
        } else {
            Status::Pass
        };
        assert_eq!(r.status, expected, "{}", r.name);
    }
    let boson = &records[4];
    assert!(rel(boson.details["implied_multiplier"], 16.0) < 1e-12);
    assert!(boson.note.is_some());

    let tuned = EstimatorInputs {
        anomaly_factor: 16.0,
        ..Default::default()
    };
    let records = headline_estimates(&tuned, &Targets::default()).unwrap();
    assert_eq!(records[4].status, Status::Pass);
}

#[test]
fn invalid_inputs_are_rejected() {
    let bad = EstimatorInputs {
        cell_size: -1.0,
        ..Default::default()
    };
    assert!(headline_estimates(&bad, &Targets::default()).is_err());
    let bad = EstimatorInputs {
        deficit: 1.5,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

/// Scaling inputs by SI prefixes scales outputs by the dimensional power.
#[test]
fn units_audit() {
    let base = EstimatorInputs::default();
    let k = 1e3;
    let n0 = sunlight_photon_density(base.irradiance, base.mean_photon_frequency);
    assert!(
        rel(
            sunlight_photon_density(base.irradiance * k, base.mean_photon_frequency),
            n0 * k
        ) < 1e-12
    );
    assert!(
        rel(
            sunlight_photon_density(base.irradiance, base.mean_photon_frequency * k),
            n0 / k
        ) < 1e-12
    );
    assert!(
        rel(
            photons_per_cell(n0, base.cell_size * k),
            photons_per_cell(n0, base.cell_size) * k.powi(3)
        ) < 1e-12
    );

    // Length scale change (m -> km) with rates held per cell: the grain
    // time depends only on the ratio shadow_length / cell_size.
    let scaled = EstimatorInputs {
        cell_size: base.cell_size * k,
        grain_size: base.grain_size * k,
        shadow_length: base.shadow_length * k,
        ..base.clone()
    };
    assert!(rel(dust_grain_collapse_time(&scaled), dust_grain_collapse_time(&base)) < 1e-12);
    // Rate in per-ms instead of per-s: times shrink by k, probabilities grow.
    let fast = EstimatorInputs {
        mu_cell: base.mu_cell * k,
        ..base.clone()
    };
    assert!(rel(dust_grain_collapse_time(&fast), dust_grain_collapse_time(&base) / k) < 1e-12);
    assert!(rel(mz_anomaly_probability(&fast), mz_anomaly_probability(&base) * k) < 1e-12);
    let slow_flight = EstimatorInputs {
        flight_time: base.flight_time / k,
        mu_cell: base.mu_cell * k,
        ..base.clone()
    };
    assert!(
        rel(
            boson_sampling_anomaly(&slow_flight, None).naive,
            boson_sampling_anomaly(&base, None).naive
        ) < 1e-12
    );
    assert!(rel(energy_model_factor((4e14 * k, 8e14 * k)).unwrap(), 2.0) < 1e-15);
}

proptest! {
    #[test]
    fn probabilities_grow_with_rate_time_and_photons(
        mu in 0.0f64..10.0, dmu in 0.0f64..10.0,
        t in 1e-10f64..1e-6, dt in 0.0f64..1e-6,
        n in 0u32..100, dn in 0u32..100,
    ) {
        let a = EstimatorInputs { mu_cell: mu, flight_time: t, n_photons: n, path_length: t * 3e8, ..Default::default() };
        let b = EstimatorInputs { mu_cell: mu + dmu, flight_time: t + dt, n_photons: n + dn, path_length: (t + dt) * 3e8, ..Default::default() };
        prop_assert!(mz_anomaly_probability(&b) >= mz_anomaly_probability(&a));
        prop_assert!(boson_sampling_anomaly(&b, None).probability >= boson_sampling_anomaly(&a, None).probability);
    }

    #[test]
    fn grain_time_shrinks_with_rate_and_shadow(
        mu in 0.01f64..10.0, dmu in 0.0f64..10.0,
        len in 1e-3f64..10.0, dlen in 0.0f64..10.0,
    ) {
        let a = EstimatorInputs { mu_cell: mu, shadow_length: len, ..Default::default() };
        let b = EstimatorInputs { mu_cell: mu + dmu, shadow_length: len + dlen, ..Default::default() };
        prop_assert!(dust_grain_collapse_time(&b) <= dust_grain_collapse_time(&a));
    }
}
