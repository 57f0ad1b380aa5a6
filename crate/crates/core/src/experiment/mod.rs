//! Experiment recipes: launch-power sweeps, size studies and PMF reports,
//! with CSV output and fingerprint-based resume.

mod report;
mod run;
mod spec;

pub use report::{report_amplitude_pmf, AmplitudeRow, PmfReport};
pub use run::{
    design, load_rows, read_rows, run_cell, run_optimize, run_power_sweep, run_size_study, write_rows, Design,
    ResultRow, RunOptions, SweepOutcome, AIR_LOG_FILE, RESULTS_FILE,
};
pub use spec::{BaseKind, Cell, ExperimentSpec, LambdaGrid, Preset, Strategy};
