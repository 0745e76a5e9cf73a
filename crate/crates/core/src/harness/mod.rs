//! Experiment orchestration: configuration, seeded parallel sweeps,
//! threshold search, studies and result emission.

pub mod config;
pub mod gridsearch;
pub mod output;
pub mod pipeline;
pub mod presets;
pub mod studies;
pub mod sweep;

pub use config::{ExperimentConfig, ParamGrid, SeOdiaMode, SweepVariable};
pub use gridsearch::{grid_search_se_odia, GridRow, GridSearchResult};
pub use output::{emit_results, OutputFormat, CSV_HEADER};
pub use presets::{preset, PRESETS};
pub use studies::{run_study, StudyKind, StudyReport};
pub use sweep::{run_sweep, PointResult, SweepResult};
