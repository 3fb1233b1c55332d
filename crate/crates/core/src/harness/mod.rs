//! Configuration, initial conditions, experiment orchestration and the
//! self-check suite.

pub mod config;
pub mod experiment;
pub mod ic;
pub mod verify;

pub use config::{parse_config, ExperimentConfig, SchemeChoice};
pub use experiment::{errors_csv, run_experiment, run_in_memory, ExperimentReport};
pub use ic::{build_ic, InitialCondition, RandomBand};
pub use verify::{verify_suite, CheckResult, VerifyOptions};
