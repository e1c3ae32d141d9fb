use super::message::Payload;
use crate::error::{Error, Result};
use crate::kmeans::{distinct_rows, kmeanspp_init_with, lloyd_weighted, CentroidSet, LloydConfig};
use crate::matrix::Matrix;
use crate::rng::{party_rng, sample_weighted, PartyRng, SERVER_STREAM};

/// The aggregator. Holds only what clients report: shard sizes, potentials,
/// revealed or aggregated centroids.
#[derive(Debug, Clone)]
pub struct Server {
    n_clients: usize,
    rng: PartyRng,
    sizes: Vec<Option<usize>>,
    potentials: Vec<f64>,
    centroids: Option<CentroidSet>,
    round: usize,
    lloyd: LloydConfig,
}

impl Server {
    pub fn new(n_clients: usize, seed: u64) -> Self {
        Self {
            n_clients,
            rng: party_rng(seed, SERVER_STREAM),
            sizes: vec![None; n_clients],
            potentials: vec![0.0; n_clients],
            centroids: None,
            round: 0,
            lloyd: LloydConfig::default(),
        }
    }

    pub fn n_clients(&self) -> usize {
        self.n_clients
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn centroids(&self) -> Option<&CentroidSet> {
        self.centroids.as_ref()
    }

    pub fn lloyd_config(&self) -> LloydConfig {
        self.lloyd
    }

    pub fn set_lloyd_config(&mut self, config: LloydConfig) {
        self.lloyd = config;
    }

    /// Reported `|X_j|`.
    pub fn dataset_sizes(&self) -> &[Option<usize>] {
        &self.sizes
    }

    /// Reported `Z_j`.
    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    /// `Z = Σ_j Z_j`.
    pub fn total_potential(&self) -> f64 {
        self.potentials.iter().sum()
    }

    pub(crate) fn set_centroids(&mut self, c: CentroidSet) {
        self.centroids = Some(c);
    }

    pub(crate) fn record(&mut self, from: usize, payload: &Payload) -> Result<()> {
        match payload {
            Payload::SizeReport { rows } => self.sizes[from] = Some(*rows),
            Payload::PotentialReport { potential } => self.potentials[from] = *potential,
            other => {
                return Err(Error::contract(format!(
                    "server does not store {:?}",
                    other.kind()
                )))
            }
        }
        Ok(())
    }

    /// Client selection masses for the first seed, `|X_j|`.
    pub fn size_weights(&self) -> Result<Vec<f64>> {
        self.sizes
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.map(|s| s as f64)
                    .ok_or_else(|| Error::contract(format!("client {j} has not reported its size")))
            })
            .collect()
    }

    /// Client selection masses for later seeds, `Z_j`.
    pub fn potential_weights(&self) -> &[f64] {
        &self.potentials
    }

    pub(crate) fn pick_by_size(&mut self) -> Result<usize> {
        let w = self.size_weights()?;
        sample_weighted(&mut self.rng, &w).ok_or(Error::EmptyDataset)
    }

    /// `None` when `Z = 0`.
    pub(crate) fn pick_by_potential(&mut self) -> Option<usize> {
        sample_weighted(&mut self.rng, &self.potentials)
    }

    /// Weighted Lloyd over the concatenated client centroids, warm-started
    /// from the current global model.
    pub(crate) fn aggregate(&mut self, points: &Matrix, sizes: &[usize]) -> Result<CentroidSet> {
        let init = self
            .centroids
            .clone()
            .ok_or_else(|| Error::contract("aggregation before initialization"))?;
        let weights: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
        let out = lloyd_weighted(points, &weights, &init, self.lloyd)?;
        self.centroids = Some(out.centroids.clone());
        self.round += 1;
        Ok(out.centroids)
    }

    /// Aggregation of locally seeded centroids when no global model exists
    /// yet: weighted k-means++ on the received rows, then weighted Lloyd.
    pub(crate) fn aggregate_cold(
        &mut self,
        points: &Matrix,
        sizes: &[usize],
        k: usize,
    ) -> Result<CentroidSet> {
        let weights: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
        let k = k.min(distinct_rows(points));
        let init = kmeanspp_init_with(points, Some(&weights), k, &mut self.rng)?;
        let out = lloyd_weighted(points, &weights, &init, self.lloyd)?;
        self.centroids = Some(out.centroids.clone());
        Ok(out.centroids)
    }
}
