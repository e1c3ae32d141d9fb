//! Simplified silhouette: `a(x)` is the distance to the own centroid, `b(x)`
//! the distance to the closest other centroid, `s(x) = (b - a) / max(a, b)`.
//!
//! Clients report `(mean s(x), |X_j|)`; the size-weighted mean of those
//! reports equals the pooled mean over all rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{squared_distance, CentroidSet};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    /// Same distance as the clustering objective.
    #[default]
    Squared,
    Euclidean,
}

impl DistanceKind {
    fn apply(self, squared: f64) -> f64 {
        match self {
            DistanceKind::Squared => squared,
            DistanceKind::Euclidean => squared.sqrt(),
        }
    }
}

/// Per-client means and their federated combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteReport {
    /// `(mean score, row count)` per client.
    pub per_client: Vec<(f64, usize)>,
    pub score: f64,
}

/// `s(x)` for one point. Errors with [`Error::UndefinedSilhouette`] when
/// `k = 1`; a point with `a = b = 0` scores 0.
pub fn simplified_silhouette_point(
    point: &[f64],
    centroids: &CentroidSet,
    distance: DistanceKind,
) -> Result<f64> {
    if centroids.k() < 2 {
        return Err(Error::UndefinedSilhouette);
    }
    if point.len() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: point.len(),
        });
    }
    Ok(score_point(point, centroids.as_matrix(), distance))
}

fn score_point(point: &[f64], centroids: &Matrix, distance: DistanceKind) -> f64 {
    // two smallest distances, lowest index first on ties
    let mut a = f64::INFINITY;
    let mut b = f64::INFINITY;
    for c in centroids.iter_rows() {
        let d = squared_distance(point, c);
        if d < a {
            b = a;
            a = d;
        } else if d < b {
            b = d;
        }
    }
    let (a, b) = (distance.apply(a), distance.apply(b));
    let denom = a.max(b);
    if denom == 0.0 {
        0.0
    } else {
        (b - a) / denom
    }
}

/// Mean of `s(x)` over a client's shard, with the shard size.
pub fn client_mean_silhouette(
    shard: &Matrix,
    centroids: &CentroidSet,
    distance: DistanceKind,
) -> Result<(f64, usize)> {
    if shard.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if centroids.k() < 2 {
        return Err(Error::UndefinedSilhouette);
    }
    if shard.cols() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: shard.cols(),
        });
    }
    let total: f64 = shard
        .iter_rows()
        .map(|p| score_point(p, centroids.as_matrix(), distance))
        .sum();
    Ok((total / shard.rows() as f64, shard.rows()))
}

/// Size-weighted mean of client reports.
pub fn federated_silhouette(reports: &[(f64, usize)]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::contract("no silhouette reports"));
    }
    if reports.iter().any(|(_, n)| *n == 0) {
        return Err(Error::contract("silhouette report with zero rows"));
    }
    let n: usize = reports.iter().map(|(_, n)| n).sum();
    let weighted: f64 = reports.iter().map(|(s, n)| s * *n as f64).sum();
    Ok(weighted / n as f64)
}

/// Centralized counterpart: every shard pooled into one report.
pub fn silhouette_report(
    shards: &[&Matrix],
    centroids: &CentroidSet,
    distance: DistanceKind,
) -> Result<SilhouetteReport> {
    let per_client = shards
        .iter()
        .map(|s| client_mean_silhouette(s, centroids, distance))
        .collect::<Result<Vec<_>>>()?;
    let score = federated_silhouette(&per_client)?;
    Ok(SilhouetteReport { per_client, score })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(rows: &[[f64; 2]]) -> CentroidSet {
        CentroidSet::from_rows(rows).unwrap()
    }

    fn s(p: [f64; 2], c: &CentroidSet) -> f64 {
        simplified_silhouette_point(&p, c, DistanceKind::Squared).unwrap()
    }

    #[test]
    fn point_examples() {
        assert_eq!(s([0.0, 0.0], &cs(&[[0.0, 0.0], [10.0, 0.0]])), 1.0);
        assert_eq!(s([5.0, 0.0], &cs(&[[0.0, 0.0], [10.0, 0.0]])), 0.0);
        assert_eq!(s([1.0, 0.0], &cs(&[[0.0, 0.0], [3.0, 0.0]])), 0.75);
    }

    #[test]
    fn coincident_centroids_score_zero() {
        assert_eq!(
            s([1.0, 1.0], &cs(&[[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]])),
            0.0
        );
    }

    #[test]
    fn euclidean_switch() {
        let c = cs(&[[0.0, 0.0], [3.0, 0.0]]);
        let v = simplified_silhouette_point(&[1.0, 0.0], &c, DistanceKind::Euclidean).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_centroid_undefined() {
        let c = cs(&[[0.0, 0.0]]);
        assert!(matches!(
            simplified_silhouette_point(&[1.0, 0.0], &c, DistanceKind::Squared),
            Err(Error::UndefinedSilhouette)
        ));
    }

    #[test]
    fn client_means() {
        let c = cs(&[[0.0, 0.0], [10.0, 0.0]]);
        let one = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert_eq!(
            client_mean_silhouette(&one, &c, DistanceKind::Squared).unwrap(),
            (1.0, 1)
        );
        let two = Matrix::from_rows(&[[0.0, 0.0], [5.0, 0.0]]).unwrap();
        assert_eq!(
            client_mean_silhouette(&two, &c, DistanceKind::Squared).unwrap(),
            (0.5, 2)
        );
    }

    #[test]
    fn federated_examples() {
        assert_eq!(federated_silhouette(&[(0.5, 10), (0.5, 90)]).unwrap(), 0.5);
        assert_eq!(federated_silhouette(&[(1.0, 1), (0.0, 3)]).unwrap(), 0.25);
        assert!(federated_silhouette(&[]).is_err());
        assert!(federated_silhouette(&[(0.1, 0)]).is_err());
    }
}
