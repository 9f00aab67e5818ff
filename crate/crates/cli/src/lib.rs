//! Experiment harness: runs, datasets, invariant checks and plot data.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod plotdata;

pub use commands::{cmd_gen_dataset, cmd_run, cmd_verify, RunReport, VerifyOptions};
pub use config::{parse_name, Algorithm, ContinuousConfig, ExperimentConfig, Overrides, Problem, RunSpec};
pub use plotdata::{cmd_plotdata, write_plot_data, LOG_FLOOR, PLOT_COLUMNS};

/// Bad input from the user; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Process exit status for an error returned by one of the commands.
pub fn exit_status(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        2
    } else {
        1
    }
}
