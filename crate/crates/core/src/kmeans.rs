//! Centralized clustering primitives.
//!
//! Distances are squared Euclidean throughout. Ties between equidistant
//! centroids always go to the lowest index.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{party_rng, sample_weighted};

/// Row count above which assignment runs on the rayon pool.
const PAR_THRESHOLD: usize = 4096;

/// Ordered, non-empty list of centroids sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct CentroidSet(Matrix);

impl CentroidSet {
    pub fn new(centroids: Matrix) -> Result<Self> {
        if centroids.rows() == 0 {
            return Err(Error::contract("a centroid set needs k >= 1"));
        }
        Ok(Self(centroids))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn k(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.0.iter_rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl TryFrom<Matrix> for CentroidSet {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<CentroidSet> for Matrix {
    fn from(c: CentroidSet) -> Matrix {
        c.0
    }
}

/// Cluster index per row and rows per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn nearest_in(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter_rows().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Index of the closest centroid and the squared distance to it, `d(x, c)`.
pub fn nearest(point: &[f64], centroids: &CentroidSet) -> Result<(usize, f64)> {
    check_dim(centroids.dim(), point.len())?;
    Ok(nearest_in(point, centroids.as_matrix()))
}

pub(crate) fn nearest_all(points: &Matrix, centroids: &Matrix) -> Vec<(usize, f64)> {
    if points.rows() >= PAR_THRESHOLD {
        (0..points.rows())
            .into_par_iter()
            .map(|i| nearest_in(points.row(i), centroids))
            .collect()
    } else {
        points
            .iter_rows()
            .map(|p| nearest_in(p, centroids))
            .collect()
    }
}

pub fn assign(points: &Matrix, centroids: &CentroidSet) -> Result<Assignment> {
    check_dim(centroids.dim(), points.cols())?;
    let mut sizes = vec![0; centroids.k()];
    let labels = nearest_all(points, centroids.as_matrix())
        .into_iter()
        .map(|(i, _)| {
            sizes[i] += 1;
            i
        })
        .collect();
    Ok(Assignment { labels, sizes })
}

/// `Σ_x d(x, c)`, the k-means potential.
pub fn potential(points: &Matrix, centroids: &CentroidSet) -> Result<f64> {
    check_dim(centroids.dim(), points.cols())?;
    Ok(nearest_all(points, centroids.as_matrix())
        .into_iter()
        .map(|(_, d)| d)
        .sum())
}

/// Row indices picked by k-means++ seeding, in order.
///
/// With `weights`, the first pick is proportional to the weight and later
/// picks to `w(x) d(x, c)`; without, the first pick is uniform and later ones
/// follow the D² law. Stops early once every row coincides with a picked
/// centroid, so the result may hold fewer than `k` indices.
pub fn kmeanspp_seed_indices<R: Rng + ?Sized>(
    points: &Matrix,
    weights: Option<&[f64]>,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = points.rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Some(w) = weights {
        check_weights(w, n)?;
    }
    let first = match weights {
        Some(w) => sample_weighted(rng, w).expect("weights carry mass"),
        None => rng.random_range(0..n),
    };
    let mut chosen = vec![first];
    let mut dist: Vec<f64> = points
        .iter_rows()
        .map(|p| squared_distance(p, points.row(first)))
        .collect();
    while chosen.len() < k {
        let mass: Vec<f64> = match weights {
            Some(w) => dist.iter().zip(w).map(|(d, w)| d * w).collect(),
            None => dist.clone(),
        };
        let Some(next) = sample_weighted(rng, &mass) else {
            break;
        };
        chosen.push(next);
        let c = points.row(next);
        for (d, p) in dist.iter_mut().zip(points.iter_rows()) {
            *d = d.min(squared_distance(p, c));
        }
    }
    Ok(chosen)
}

/// Centralized k-means++ seeding.
///
/// Draws from stream 0 of `seed` (see [`crate::rng`]).
pub fn kmeanspp_init(points: &Matrix, k: usize, seed: u64) -> Result<CentroidSet> {
    kmeanspp_init_with(points, None, k, &mut party_rng(seed, 0))
}

pub fn kmeanspp_init_with<R: Rng + ?Sized>(
    points: &Matrix,
    weights: Option<&[f64]>,
    k: usize,
    rng: &mut R,
) -> Result<CentroidSet> {
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let idx = kmeanspp_seed_indices(points, weights, k, rng)?;
    if idx.len() < k {
        return Err(Error::Infeasible(format!(
            "k = {k} exceeds the {} distinct rows with positive weight",
            idx.len()
        )));
    }
    CentroidSet::new(points.select_rows(&idx))
}

pub fn distinct_rows(points: &Matrix) -> usize {
    points
        .iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len()
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::contract(format!(
            "{} weights for {n} rows",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::contract("weights must be finite and non-negative"));
    }
    if !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::contract("at least one weight must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub max_iters: usize,
    /// Stop once the largest squared centroid shift falls below this.
    pub tolerance: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tolerance: 1e-8,
        }
    }
}

/// Result of one assignment + mean update.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydStep {
    /// Updated centroids of the clusters that kept positive weight.
    pub centroids: Matrix,
    /// Row count behind each updated centroid.
    pub sizes: Vec<usize>,
    /// Index, in the input set, of each surviving centroid.
    pub kept: Vec<usize>,
}

/// One Lloyd step. Clusters without positive weight are dropped.
pub fn lloyd_step(points: &Matrix, weights: &[f64], centroids: &Matrix) -> Result<LloydStep> {
    check_dim(centroids.cols(), points.cols())?;
    check_weights(weights, points.rows())?;
    let k = centroids.rows();
    let dim = points.cols();
    let nearest = nearest_all(points, centroids);
    let mut sums = vec![0.0; k * dim];
    let mut mass = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for ((p, w), (c, _)) in points.iter_rows().zip(weights).zip(&nearest) {
        counts[*c] += 1;
        if *w == 0.0 {
            continue;
        }
        mass[*c] += w;
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p) {
            *s += w * x;
        }
    }
    let mut out = Matrix::empty(dim);
    let mut sizes = Vec::new();
    let mut kept = Vec::new();
    for c in 0..k {
        if mass[c] > 0.0 {
            let mean: Vec<f64> = sums[c * dim..(c + 1) * dim]
                .iter()
                .map(|s| s / mass[c])
                .collect();
            out.push_row(&mean)?;
            sizes.push(counts[c]);
            kept.push(c);
        }
    }
    Ok(LloydStep {
        centroids: out,
        sizes,
        kept,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    pub centroids: CentroidSet,
    /// Assignment of every row to the final centroids.
    pub assignment: Assignment,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted inertia before the first update and after each one.
    pub inertia: Vec<f64>,
}

impl LloydOutcome {
    pub fn k(&self) -> usize {
        self.centroids.k()
    }
}

/// Weighted inertia `Σ w(x) d(x, c)`.
pub fn weighted_inertia(points: &Matrix, weights: &[f64], centroids: &Matrix) -> f64 {
    nearest_all(points, centroids)
        .iter()
        .zip(weights)
        .map(|((_, d), w)| w * d)
        .sum()
}

/// Weighted Lloyd iterations from `init`.
///
/// Each centroid moves to the weighted mean of its rows. A centroid whose
/// cluster loses all weight is dropped for the rest of the run, so the
/// returned set can be smaller than `init`.
pub fn lloyd_weighted(
    points: &Matrix,
    weights: &[f64],
    init: &CentroidSet,
    config: LloydConfig,
) -> Result<LloydOutcome> {
    check_dim(init.dim(), points.cols())?;
    check_weights(weights, points.rows())?;
    let mut centroids = init.as_matrix().clone();
    let mut inertia = vec![weighted_inertia(points, weights, &centroids)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        let step = lloyd_step(points, weights, &centroids)?;
        let shift = step
            .kept
            .iter()
            .enumerate()
            .map(|(new, &old)| squared_distance(step.centroids.row(new), centroids.row(old)))
            .fold(0.0, f64::max);
        centroids = step.centroids;
        iterations += 1;
        inertia.push(weighted_inertia(points, weights, &centroids));
        if shift < config.tolerance {
            converged = true;
            break;
        }
    }
    let centroids = CentroidSet::new(centroids)?;
    let assignment = assign(points, &centroids)?;
    Ok(LloydOutcome {
        centroids,
        assignment,
        iterations,
        converged,
        inertia,
    })
}

/// Centralized k-means: k-means++ seeding followed by Lloyd to convergence.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, config: LloydConfig) -> Result<LloydOutcome> {
    let init = kmeanspp_init(points, k, seed)?;
    lloyd_weighted(points, &vec![1.0; points.rows()], &init, config)
}
