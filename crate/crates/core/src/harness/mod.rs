//! Batch runs driven by a JSON config: the `higgsflow` binary is a thin
//! wrapper around [`run`].

pub mod commands;
pub mod config;
pub mod output;
pub mod snapshot;

pub use commands::{
    build_scenarios, relative_error, run, variation_rows, verify_rows, CheckRow, Outcome, RunError, VariationRow,
};
pub use config::{Command, RunConfig, ScenarioSource, SweepConfig, VariationConfig, VerifyTolerances, OUT_DIR_ENV};
pub use output::{slug, write_atomic};
pub use snapshot::Snapshot;
