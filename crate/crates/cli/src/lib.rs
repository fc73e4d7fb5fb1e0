//! Experiment runner for the decoherent two-dimensional alternative quantum
//! walk: configuration parsing, CSV datasets and figure presets.

pub mod config;
pub mod experiment;
pub mod preset;
pub mod suites;

pub use config::{parse_config, ConfigError, Engine, Experiment, ExperimentConfig};
pub use experiment::{render_experiment, run_experiment, run_experiment_in, CsvFile};
pub use preset::{run_preset, Overrides, Preset};
