#![allow(dead_code)]

use fedids::{CentroidSet, Client, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Probability that centralized k-means++ picks the pooled rows `seq` in
/// order: uniform first pick, then D² over the pool.
pub fn kmeanspp_sequence_probability(pool: &[Vec<f64>], seq: &[usize]) -> f64 {
    let n = pool.len() as f64;
    let mut p = 1.0 / n;
    for t in 1..seq.len() {
        let d = |x: &Vec<f64>| {
            seq[..t]
                .iter()
                .map(|&c| sq(x, &pool[c]))
                .fold(f64::INFINITY, f64::min)
        };
        let total: f64 = pool.iter().map(d).sum();
        if total == 0.0 {
            return 0.0;
        }
        p *= d(&pool[seq[t]]) / total;
    }
    p
}

/// Pooled simplified silhouette with squared distances.
pub fn pooled_silhouette(pool: &[Vec<f64>], centroids: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for x in pool {
        let d: Vec<f64> = centroids.iter().map(|c| sq(x, c)).collect();
        let own = (0..d.len())
            .min_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap().then(i.cmp(&j)))
            .unwrap();
        let a = d[own];
        let b = d
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != own)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        let s = if a.max(b) == 0.0 {
            0.0
        } else {
            (b - a) / a.max(b)
        };
        sum += s;
    }
    sum / pool.len() as f64
}

/// Index of the nearest centroid, lowest index on ties.
pub fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    for (i, c) in centroids.iter().enumerate() {
        if sq(x, c) < sq(x, &centroids[best]) {
            best = i;
        }
    }
    best
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// Random assignment of `n` rows to `clients` shards, each non-empty.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, clients: usize) -> Vec<Vec<usize>> {
    assert!(clients <= n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut shards: Vec<Vec<usize>> = (0..clients).map(|j| vec![order[j]]).collect();
    for &i in &order[clients..] {
        shards[rng.random_range(0..clients)].push(i);
    }
    shards
}

pub fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

pub fn shard_matrices(pool: &[Vec<f64>], shards: &[Vec<usize>]) -> Vec<Matrix> {
    shards
        .iter()
        .map(|s| matrix(&s.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>()))
        .collect()
}

pub fn clients(shards: &[Matrix]) -> Vec<Client> {
    shards
        .iter()
        .enumerate()
        .map(|(j, m)| Client::new(j, m.clone()).unwrap())
        .collect()
}

pub fn centroid_set(rows: &[Vec<f64>]) -> CentroidSet {
    CentroidSet::from_rows(rows).unwrap()
}

/// Every ordered sequence of `k` indices below `n`, repeats included.
pub fn sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}
