//! Experiment orchestration: configuration, seeding, budget accounting and result files.
//!
//! A [`RunConfig`] names one cell of a comparison (instance, formulation, algorithm,
//! schedule, levels). [`run_experiments`] executes every repeat of every cell in
//! parallel; [`emit_results`] and [`plot_export`] write the tables.

mod config;
mod output;
mod runner;

pub use config::{
    load_config, save_config, AlgorithmKind, FormulationKind, InstanceSpec, RunConfig, ScheduleSpec,
};
pub use output::{
    emit_results, load_results, mean_sd, plot_export, read_csv, summarize, summarize_rows,
    write_csv, write_json, write_plot, CsvRow, OutputFormat, Summary, CSV_HEADER, SUMMARY_RUN_ID,
};
pub use runner::{
    resolve_instance, resolve_schedule, run_experiment, run_experiments, run_repeat, AlphaRun,
    RunMeta,
};
