use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, SelectionMode};
use super::sweep::ExperimentReport;
use crate::error::{Error, Result};

/// Local maxima found on one silhouette curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMaxima {
    pub r: Option<usize>,
    pub maxima: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub algorithm: Algorithm,
    pub r: Option<usize>,
    pub k: usize,
    /// Every curve inspected, in increasing `r`.
    pub candidates: Vec<CurveMaxima>,
    pub rationale: String,
}

/// Points scoring strictly above both grid neighbours. Curve ends never
/// qualify, and neither do plateaus.
pub fn local_maxima(curve: &[(usize, f64)]) -> Vec<(usize, f64)> {
    curve
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1])
        .collect()
}

/// Picks the smallest `r` whose curve has a local maximum, then the best
/// local maximum on that curve. Curves are `(k, score)` lists keyed by `r`.
pub fn select_from_curves(
    curves: &BTreeMap<Option<usize>, Vec<(usize, f64)>>,
) -> Result<(Option<usize>, usize, Vec<CurveMaxima>)> {
    let candidates: Vec<CurveMaxima> = curves
        .iter()
        .map(|(&r, c)| {
            let mut c = c.clone();
            c.sort_by_key(|p| p.0);
            CurveMaxima {
                r,
                maxima: local_maxima(&c),
            }
        })
        .collect();
    let chosen = candidates
        .iter()
        .find(|c| !c.maxima.is_empty())
        .ok_or_else(|| {
            Error::Selection(
                "no silhouette curve has a local maximum; choose k and r manually".into(),
            )
        })?;
    // highest score, lowest k on ties
    let best = chosen
        .maxima
        .iter()
        .copied()
        .fold(None, |acc: Option<(usize, f64)>, p| match acc {
            Some(a) if a.1 >= p.1 => Some(a),
            _ => Some(p),
        })
        .expect("non-empty");
    Ok((chosen.r, best.0, candidates))
}

fn curves(
    report: &ExperimentReport,
    algorithm: Algorithm,
) -> BTreeMap<Option<usize>, Vec<(usize, f64)>> {
    let mut out: BTreeMap<Option<usize>, Vec<(usize, f64)>> = BTreeMap::new();
    for run in report.runs_for(algorithm) {
        let entry = out.entry(run.r).or_default();
        if let Some(s) = run.silhouette() {
            entry.push((run.k, s));
        }
    }
    out
}

fn fmt_r(r: Option<usize>) -> String {
    r.map_or_else(|| "/".to_string(), |r| r.to_string())
}

/// Model selection for one algorithm according to the report's config.
pub fn select_model(report: &ExperimentReport, algorithm: Algorithm) -> Result<Selection> {
    let curves = curves(report, algorithm);
    if curves.values().all(Vec::is_empty) {
        return Err(Error::Selection(format!(
            "no completed run with a silhouette score for {algorithm}"
        )));
    }
    match report.config.selection {
        SelectionMode::Manual { k, r } => {
            let r = algorithm.is_federated().then_some(r);
            let run = report
                .find(algorithm, k, r)
                .filter(|run| run.metrics().is_some())
                .ok_or_else(|| {
                    Error::Selection(format!(
                        "manual choice k={k} r={} was not completed for {algorithm}",
                        fmt_r(r)
                    ))
                })?;
            Ok(Selection {
                algorithm,
                r: run.r,
                k,
                candidates: Vec::new(),
                rationale: format!("manual selection k={k} r={}", fmt_r(r)),
            })
        }
        SelectionMode::Auto => {
            let (r, k, candidates) = select_from_curves(&curves)?;
            let mut rationale = String::new();
            for c in &candidates {
                let listed: Vec<String> = c
                    .maxima
                    .iter()
                    .map(|(k, s)| format!("k={k} ({s:.4})"))
                    .collect();
                rationale.push_str(&format!(
                    "r={}: {}; ",
                    fmt_r(c.r),
                    if listed.is_empty() {
                        "no local maximum".to_string()
                    } else {
                        listed.join(", ")
                    }
                ));
            }
            rationale.push_str(&format!("chose r={} k={k}", fmt_r(r)));
            Ok(Selection {
                algorithm,
                r,
                k,
                candidates,
                rationale,
            })
        }
    }
}
