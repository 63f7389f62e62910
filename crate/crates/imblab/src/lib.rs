//! Config-driven experiments on top of `imblab-core`: file formats, CSV
//! outputs, the step-size grid executor and the command line.

pub mod cli;
pub mod config;
mod error;
pub mod executor;
pub mod experiment;
pub mod io;
pub mod replicate;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{run_experiment, OptimizerRun, Outcome};
