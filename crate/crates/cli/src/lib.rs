//! Harness library behind the `gofmult` binary: experiment configuration,
//! CSV/JSON input and output, the Monte Carlo experiment runner, the
//! gradient cross-check and the timing comparison.

pub mod config;
pub mod gradcheck;
pub mod io;
pub mod runner;
pub mod timing;

pub use config::{ExperimentConfig, ModelSpec};
pub use gradcheck::{run_gradient_check, GradCheckReport};
pub use runner::{run_experiment, CellResult, ExperimentReport};
pub use timing::{run_timing, TimingReport};
