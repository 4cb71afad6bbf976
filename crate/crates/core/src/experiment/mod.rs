//! Configuration, persistence and the subcommand drivers.

pub mod artifacts;
pub mod checkpoint;
mod commands;
pub mod config;

pub use artifacts::{parse_series_csv, series_csv, verify_manifest, write_atomic, RunManifest};
pub use checkpoint::{checkpoint_load, checkpoint_save};
pub use commands::{
    base_datum, cli_bkm, cli_cauchy_sweep, cli_counterexample, cli_simulate, cli_verify_theorem, initial_datum,
    parse_j_list, run_monitors, simulate_command, ExitStatus, Outcome, BKM_BATTERY, THEOREM_BATTERY,
};
pub use config::{ExperimentConfig, Generator};
