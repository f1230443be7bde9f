//! Experiment harness for `optframe-core`: experiment specs and config
//! files, name registries, CSV datasets, and the trace and summary writers
//! behind the `optframe` command.

pub mod data;
pub mod experiment;
pub mod registry;
pub mod spec;

pub use experiment::{check_gradient, run_experiment, RunError, Summary};
pub use spec::{ExperimentSpec, Initializer, Settings, SpecError};

/// Environment variable holding the default base seed.
pub const SEED_ENV: &str = "OPTFRAME_SEED";
