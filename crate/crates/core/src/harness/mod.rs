//! Synthetic data, experiment configs and reproducible result files.

mod config;
mod generate;
mod run;

pub use config::{ExperimentConfig, GeneratorSpec, MixtureComponent, Mode};
pub use generate::{generate, generate_for};
pub use run::{execute, generate_csv, run, RunOutput, VERSION};
