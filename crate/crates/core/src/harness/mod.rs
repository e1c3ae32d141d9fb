//! Experiment driver: sweep `(algorithm, k, r)`, pick a model from the
//! silhouette curves, score it, and write reports.

mod config;
mod report;
mod select;
mod sweep;

pub use config::{Algorithm, DataConfig, ExperimentConfig, SelectionMode, SweepConfig, VoteSet};
pub use report::{
    emit_reports, manifest, Manifest, F1_CURVES, MANIFEST, SILHOUETTE_CURVES, SUMMARY,
};
pub use select::{local_maxima, select_from_curves, select_model, CurveMaxima, Selection};
pub use sweep::{
    combination_seed, prepare, run_combination, sweep, sweep_with, ExperimentReport, Outcome,
    PreparedData, RunMetrics, RunRecord,
};
