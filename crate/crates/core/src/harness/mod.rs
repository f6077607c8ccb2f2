//! Closed-loop simulation, controller comparison, training-horizon sweeps
//! and the command-line interface.

pub mod cli;
mod compare;
mod config;
mod metrics;
mod output;
mod run;

pub use compare::{
    compare_controllers, sweep_training_horizon, ComparisonRow, ComparisonTable, RunOutcome, SweepRow, SweepTable,
    SWEEP_CONTROLLERS,
};
pub use config::{ControllerKind, SimConfig};
pub use metrics::{compute_metrics, realized_step_objective, Metrics, StepRecord};
pub use output::{read_run_csv, run_csv_bytes, write_atomic, write_metrics_json, write_run_csv, RUN_CSV_HEADER};
pub use run::{disturbance_for, run_closed_loop, run_closed_loop_on, RunRecord};
