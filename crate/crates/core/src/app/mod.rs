//! System files, the temperature case study, reports and sweep tables.

mod analysis;
mod spec;
mod sweep;
pub mod temperature;

pub use analysis::{
    run_analysis, run_analysis_with, BoundsSummary, EllipsoidSummary, GeometrySummary, Ratios,
    ReachTime, ReachTimes, Report, SpectrumSummary, Stages, SweepRow, SystemSummary,
};
pub use spec::{load_system, seed_from_env, AnalysisOptions, SystemSpec};
pub use sweep::{sweep_csv, sweep_pairs_csv, write_atomic};
pub use temperature::{build_temperature_system, TemperatureLoss, TemperatureParams};
