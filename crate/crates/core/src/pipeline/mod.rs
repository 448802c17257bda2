//! Experiment orchestration: configuration, step-circuit assembly, run
//! drivers and artifact emission.

pub mod artifacts;
pub mod config;
pub mod run;
pub mod step;

pub use artifacts::emit_outputs;
pub use config::{ExperimentConfig, LoaderSpec, RunMode};
pub use run::{
    run, run_noise_companion, run_per_step, run_single_circuit, CompanionEstimate, RunArtifacts,
    StepRecord,
};
pub use step::{build_loader, build_step_circuit, make_layout, step_budget, StepBudget};
