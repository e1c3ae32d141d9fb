//! Cluster-vote classifier.
//!
//! Each client reports, per cluster, the benign share of its rows and how many
//! rows it has there. The server combines them into `P_i`; a cluster is benign
//! iff `P_i > 0.5`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{nearest_all, CentroidSet};
use crate::matrix::Matrix;

pub use crate::dataset::Label;

/// One client's view of one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterVote {
    /// Benign share of the client's rows in the cluster; 0 when `size == 0`.
    pub benign_fraction: f64,
    pub size: usize,
}

/// Per-cluster votes of one client, indexed like the centroid set.
pub fn client_vote(
    points: &Matrix,
    labels: &[Label],
    centroids: &CentroidSet,
) -> Result<Vec<ClusterVote>> {
    if labels.len() != points.rows() {
        return Err(Error::contract(format!(
            "{} labels for {} rows",
            labels.len(),
            points.rows()
        )));
    }
    if points.cols() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: points.cols(),
        });
    }
    let mut benign = vec![0usize; centroids.k()];
    let mut size = vec![0usize; centroids.k()];
    for ((c, _), l) in nearest_all(points, centroids.as_matrix())
        .iter()
        .zip(labels)
    {
        size[*c] += 1;
        benign[*c] += usize::from(*l == Label::Benign);
    }
    Ok(benign
        .iter()
        .zip(&size)
        .map(|(&b, &s)| ClusterVote {
            benign_fraction: if s == 0 { 0.0 } else { b as f64 / s as f64 },
            size: s,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteTable {
    /// `p[i][j]`: benign share of cluster `i` at client `j`.
    pub proportions: Vec<Vec<f64>>,
    /// `s[i][j]`: rows of client `j` in cluster `i`.
    pub sizes: Vec<Vec<usize>>,
    /// Aggregated benign share; `None` for a cluster no client populates.
    pub benign_share: Vec<Option<f64>>,
    pub labels: Vec<Label>,
}

impl VoteTable {
    pub fn k(&self) -> usize {
        self.labels.len()
    }
}

/// Combines client votes; globally empty clusters are labelled attack.
pub fn aggregate_votes(tables: &[Vec<ClusterVote>]) -> Result<VoteTable> {
    let Some(first) = tables.first() else {
        return Err(Error::contract("no vote tables"));
    };
    let k = first.len();
    if tables.iter().any(|t| t.len() != k) {
        return Err(Error::contract(
            "vote tables disagree on the number of clusters",
        ));
    }
    let mut proportions = Vec::with_capacity(k);
    let mut sizes = Vec::with_capacity(k);
    let mut benign_share = Vec::with_capacity(k);
    let mut labels = Vec::with_capacity(k);
    for i in 0..k {
        let p: Vec<f64> = tables.iter().map(|t| t[i].benign_fraction).collect();
        let s: Vec<usize> = tables.iter().map(|t| t[i].size).collect();
        let total: usize = s.iter().sum();
        let share = (total > 0).then(|| {
            let num: f64 = p
                .iter()
                .zip(&s)
                .filter(|(_, &n)| n > 0)
                .map(|(p, &n)| p * n as f64)
                .sum();
            num / total as f64
        });
        labels.push(match share {
            Some(v) if v > 0.5 => Label::Benign,
            _ => Label::Attack,
        });
        proportions.push(p);
        sizes.push(s);
        benign_share.push(share);
    }
    Ok(VoteTable {
        proportions,
        sizes,
        benign_share,
        labels,
    })
}

/// Labels every row with the label of its nearest centroid.
pub fn predict(points: &Matrix, centroids: &CentroidSet, votes: &VoteTable) -> Result<Vec<Label>> {
    if votes.k() != centroids.k() {
        return Err(Error::contract(format!(
            "votes cover {} clusters, model has {}",
            votes.k(),
            centroids.k()
        )));
    }
    if points.cols() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: points.cols(),
        });
    }
    Ok(nearest_all(points, centroids.as_matrix())
        .into_iter()
        .map(|(c, _)| votes.labels[c])
        .collect())
}

/// Confusion counts and derived scores; attack is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when precision or recall had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

pub fn score(predictions: &[Label], truth: &[Label]) -> Result<MetricsReport> {
    if predictions.len() != truth.len() {
        return Err(Error::contract(format!(
            "{} predictions for {} ground-truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, t) in predictions.iter().zip(truth) {
        match (p.is_attack(), t.is_attack()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let degenerate = precision.is_none() || recall.is_none();
    let (precision, recall) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsReport {
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, truth.len()).unwrap_or(0.0),
        precision,
        recall,
        f1,
        degenerate,
    })
}
