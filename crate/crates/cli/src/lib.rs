//! Experiment orchestration for the bvc toolkit: config parsing, the
//! experiment registry, CSV/SVG emission, determinism control.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{run_experiment, RunOutcome};
pub use report::{emit_csv, emit_svg_plot, ExperimentReport, NormRow, TrialRow};
