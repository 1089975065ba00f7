//! Built-in experiment configurations.

use crate::config::{parse_config, ConfigErrors, ExperimentConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $summary:literal) => {
        Preset {
            name: $name,
            summary: $summary,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!(
        "headline-estimates",
        "order-of-magnitude estimates for sunlight, dust grains and interferometers"
    ),
    preset!(
        "number-csl-dephasing",
        "single-cell number CSL dephasing against the closed form"
    ),
    preset!(
        "energy-csl-hopping",
        "energy-density CSL with free hopping on four cells"
    ),
    preset!(
        "grw-average-two-cell",
        "averaged GRW master equation on two coupled cells"
    ),
    preset!(
        "grw-cross-validation",
        "trajectory ensemble against the averaged master equation"
    ),
    preset!(
        "trajectory-two-cell",
        "unravelled GRW trajectories on two coupled cells"
    ),
    preset!("dust-grain-shadow", "grain superposition casting photon shadows"),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn load(name: &str) -> Option<Result<ExperimentConfig, ConfigErrors>> {
    find(name).map(|p| parse_config(p.text))
}
