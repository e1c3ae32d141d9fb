use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use super::select::{select_model, Selection};
use super::sweep::{ExperimentReport, Outcome};
use crate::error::{Error, Result};

pub const SILHOUETTE_CURVES: &str = "silhouette_curves.csv";
pub const F1_CURVES: &str = "f1_curves.csv";
pub const SUMMARY: &str = "summary.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeed {
    pub algorithm: Algorithm,
    pub k: usize,
    pub r: Option<usize>,
    pub seed: u64,
}

/// Provenance of a set of reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub root_seed: u64,
    pub crate_name: String,
    pub crate_version: String,
    pub n_clients: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub features: usize,
    pub completed: usize,
    pub skipped: usize,
    pub selections: Vec<Selection>,
    /// Algorithms whose selection failed, with the reason.
    pub selection_failures: Vec<(Algorithm, String)>,
    pub seeds: Vec<RunSeed>,
}

fn algorithms(report: &ExperimentReport) -> Vec<Algorithm> {
    let mut a: Vec<Algorithm> = report.runs.iter().map(|r| r.algorithm).collect();
    a.dedup();
    a
}

pub fn manifest(report: &ExperimentReport) -> Manifest {
    let mut selections = Vec::new();
    let mut selection_failures = Vec::new();
    for a in algorithms(report) {
        match select_model(report, a) {
            Ok(s) => selections.push(s),
            Err(e) => selection_failures.push((a, e.to_string())),
        }
    }
    let skipped = report
        .runs
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Skipped { .. }))
        .count();
    Manifest {
        config_hash: report.config_hash.clone(),
        root_seed: report.config.seed,
        crate_name: env!("CARGO_PKG_NAME").into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        n_clients: report.n_clients,
        train_rows: report.train_rows,
        test_rows: report.test_rows,
        features: report.features,
        completed: report.runs.len() - skipped,
        skipped,
        selections,
        selection_failures,
        seeds: report
            .runs
            .iter()
            .map(|r| RunSeed {
                algorithm: r.algorithm,
                k: r.k,
                r: r.r,
                seed: r.seed,
            })
            .collect(),
    }
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| wrap(path, e))?;
    w.write_record(header).map_err(|e| wrap(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| wrap(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn wrap(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Writes the silhouette and F1 curves, the summary table and the manifest
/// into `out`. Identical reports produce byte-identical files.
pub fn emit_reports(report: &ExperimentReport, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let curve_rows =
        |value: &dyn Fn(&super::sweep::RunMetrics) -> Option<f64>| -> Vec<Vec<String>> {
            report
                .runs
                .iter()
                .map(|r| {
                    vec![
                        r.algorithm.to_string(),
                        r.k.to_string(),
                        opt(r.r),
                        opt(r.metrics().and_then(value)),
                    ]
                })
                .collect()
        };
    let silhouette = out.join(SILHOUETTE_CURVES);
    write_csv(
        &silhouette,
        &["algorithm", "k", "r", "score"],
        curve_rows(&|m| m.silhouette),
    )?;
    let f1 = out.join(F1_CURVES);
    write_csv(
        &f1,
        &["algorithm", "k", "r", "f1"],
        curve_rows(&|m| Some(m.metrics.f1)),
    )?;

    let manifest = manifest(report);
    let summary_rows = manifest
        .selections
        .iter()
        .filter_map(|s| {
            let m = report.find(s.algorithm, s.k, s.r)?.metrics()?;
            Some(vec![
                s.algorithm.model_name().to_string(),
                format!("{:.4}", m.metrics.accuracy),
                format!("{:.4}", m.metrics.precision),
                format!("{:.4}", m.metrics.recall),
                format!("{:.4}", m.metrics.f1),
                s.k.to_string(),
                s.r.map_or_else(|| "/".into(), |r| r.to_string()),
            ])
        })
        .collect();
    let summary = out.join(SUMMARY);
    write_csv(
        &summary,
        &["Model", "Accuracy", "Precision", "Recall", "F1", "k", "r"],
        summary_rows,
    )?;
    let manifest_path = out.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(vec![silhouette, f1, summary, manifest_path])
}
