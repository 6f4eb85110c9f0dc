//! Experiment configuration, orchestration and report writing.

pub mod config;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentKind};
pub use run::{run, Report};
