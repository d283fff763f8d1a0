//! Experiment orchestration: documents, sweeps, CSV output and the CLI.
//!
//! Each scenario writes one long-format CSV (`<scenario>.csv`) and a
//! `manifest.toml`. Every CSV row carries the root seed, trial count, method
//! and a hash of the configuration that produced it; the manifest maps each
//! hash back to the full configuration. Output bytes depend only on the
//! spec, never on thread count.

pub mod cli;
pub mod run;
pub mod spec;

pub use cli::{cli_main, run_cli, table2};
pub use run::{
    config_hash, execute, nmse_ensemble, run_experiment, ExperimentOutput, PointOutcome,
};
pub use spec::{parse_spec, to_toml, ComplexityParams, ExperimentSpec, Metadata, Scenario, Sweep};
