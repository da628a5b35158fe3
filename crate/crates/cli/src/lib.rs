//! Experiment harness for `spinberry-core`: configuration, single runs,
//! parameter sweeps and the verification suite.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use app::run;
pub use config::{Axis, Grid, Mode, OutputFormat, RunConfig, Settings, Spacing};
pub use error::CliError;
pub use run::{run_simulate, run_sweep, run_verify, Entry, SweepResult};
