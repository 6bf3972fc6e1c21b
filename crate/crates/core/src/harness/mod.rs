//! Declarative Monte Carlo experiments over the policies.

mod calibrate;
mod config;
mod estimate;
mod output;
mod runner;
mod sweep;

pub use calibrate::{calibrate_w, Calibration, CalibrationRow};
pub use config::{
    CapSpec, EstimatorSpec, ExperimentConfig, HintSpec, OfulSpec, PolicySpec, RandomFill, SeedSpec,
};
pub use estimate::{estimate, EstimateRecord, EstimateReport};
pub use output::{to_json, write_outputs, write_run, Manifest};
pub use runner::{
    nearest_rank, run_experiment, run_seed, PhaseStats, Quantiles, RunOptions, RunSummary, SeedOutcome, Streams,
    Transition, SCHEMA_VERSION,
};
pub use sweep::{sweep_frontier, with_g, FrontierRow, FrontierTable};
