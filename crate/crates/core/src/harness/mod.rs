//! Sweeps, slope fits, figures and cross-engine validation.

pub mod config;
pub mod fit;
pub mod plot;
pub mod sweep;
pub mod validate;

pub use config::{Comparison, Engine, ExperimentConfig, SliceGrid, SliceSpec};
pub use fit::{fit_power_law, fit_slope, SeriesSelector, SlopeFit, Window};
pub use plot::{emit_plot, PlotStyle};
pub use sweep::{default_workers, read_records, run_sweep, run_sweep_to_path, SweepRecord, SweepSummary, WORKERS_ENV};
pub use validate::{validate, ValidationReport};
