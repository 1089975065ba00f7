//! Command-line front end: config parsing, presets and the experiment runner.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{parse_config, ConfigErrors, ConfigIssue, ExperimentConfig, ExperimentKind};
pub use runner::{run, RunManifest, RunOptions, RunOutcome, Source};

/// Process exit codes.
pub mod exit {
    pub const PASSED: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RUNTIME_ERROR: i32 = 3;
}
