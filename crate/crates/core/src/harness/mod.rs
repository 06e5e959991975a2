//! Experiment configs, builtin presets, execution, CSV output and the
//! property-suite driver.

mod checks;
mod config;
mod output;
mod presets;
mod run;

pub use checks::{phase_desk_instance, run_checks, suite_targets, SuiteReport, QUARTIC_SPEC, SUITES};
pub use config::{AlgorithmSpec, DroInit, ExperimentConfig, ProblemSpec, WarmStart, SCHEMA_VERSION};
pub use output::{emit_csv, git_describe, read_csv, write_outputs, CSV_HEADER};
pub use presets::{preset, DRO_CSV_PATH, PRESET_NAMES};
pub use run::{
    build_problem, iterations_for, run_algorithm, run_experiment, ExperimentOutput, Problem, ResultRow, RunSummary,
    THREADS_ENV,
};
