//! Experiment runner for the AZ studies: JSON configs in, CSV, JSON and SVG
//! artifacts out.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{ExperimentConfig, Profile, Refusal};
pub use run::{run_experiment, verify_dir, Report};
