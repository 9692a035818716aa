//! Experiment sweeps: configuration, trial execution, result tables,
//! summaries, plots and reports.

pub mod config;
pub mod plot;
pub mod report;
pub mod stats;
pub mod table;
pub mod trial;

pub use config::{CellParams, Param, PlotSpec, Preset, SweepConfig};
pub use plot::render_plot;
pub use report::render_report;
pub use stats::{fit_loglog_slope, summarize, SlopeFit, SummaryRow};
pub use trial::{run_sweep, run_trial, trial_seed, ResultTable, TrialRecord, TrialSettings};
