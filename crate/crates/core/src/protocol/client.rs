use rand::Rng;

use super::message::{Payload, Reply, SampleMode};
use crate::classifier::{client_vote, Label};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kmeans::{self, kmeanspp_seed_indices, squared_distance, CentroidSet};
use crate::matrix::Matrix;
use crate::rng::{party_rng, sample_weighted, PartyRng};
use crate::silhouette::client_mean_silhouette;

/// A federation member holding a private shard `X_j`.
///
/// The shard never leaves the client except as rows drawn on a
/// [`Payload::SampleRequest`].
#[derive(Debug, Clone)]
pub struct Client {
    id: usize,
    points: Matrix,
    labels: Option<Vec<Label>>,
    rng: PartyRng,
    centroids: Option<CentroidSet>,
    sizes: Option<Vec<usize>>,
    /// `d(x, c)` per row against `centroids`.
    dist: Vec<f64>,
    /// How many leading centroids are folded into `dist`.
    folded: usize,
    potential: f64,
}

impl Client {
    pub fn new(id: usize, points: Matrix) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::contract(format!("client {id} has an empty shard")));
        }
        Ok(Self {
            id,
            dist: vec![f64::INFINITY; points.rows()],
            points,
            labels: None,
            rng: party_rng(0, id as u64),
            centroids: None,
            sizes: None,
            folded: 0,
            potential: 0.0,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.points.rows() {
            return Err(Error::contract(format!(
                "{} labels for {} rows",
                labels.len(),
                self.points.rows()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn from_dataset(id: usize, shard: &Dataset) -> Result<Self> {
        let c = Self::new(id, shard.features().clone())?;
        match shard.labels() {
            Some(l) => c.with_labels(l.to_vec()),
            None => Ok(c),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Current local centroids `c^j`.
    pub fn centroids(&self) -> Option<&CentroidSet> {
        self.centroids.as_ref()
    }

    /// Cluster sizes `s^j` from the last local update.
    pub fn sizes(&self) -> Option<&[usize]> {
        self.sizes.as_deref()
    }

    /// `Z_j = Σ_{x ∈ X_j} d(x, c)` for the current centroids.
    pub fn potential(&self) -> f64 {
        self.potential
    }

    /// Local D² masses `d(x, c)`, one per row.
    pub fn d2_weights(&self) -> &[f64] {
        &self.dist
    }

    pub(crate) fn reseed(&mut self, seed: u64) {
        self.rng = party_rng(seed, self.id as u64);
    }

    /// Adopts `centroids` as `c^j` and refreshes `d(x, c)` and `Z_j`.
    pub fn observe(&mut self, centroids: &CentroidSet) {
        let extends = match &self.centroids {
            Some(old) => {
                old.dim() == centroids.dim()
                    && old.k() == self.folded
                    && self.folded <= centroids.k()
                    && (0..self.folded).all(|i| old.get(i) == centroids.get(i))
            }
            None => false,
        };
        if !extends {
            self.dist.fill(f64::INFINITY);
            self.folded = 0;
        }
        for c in centroids.iter().skip(self.folded) {
            for (d, p) in self.dist.iter_mut().zip(self.points.iter_rows()) {
                *d = d.min(squared_distance(p, c));
            }
        }
        self.folded = centroids.k();
        self.potential = self.dist.iter().sum();
        self.centroids = Some(centroids.clone());
    }

    pub fn size_report(&self) -> Payload {
        Payload::SizeReport {
            rows: self.points.rows(),
        }
    }

    /// Reacts to one server message.
    pub fn handle(&mut self, payload: &Payload) -> Result<Vec<Payload>> {
        match payload {
            Payload::SampleRequest { mode } => self.sample(*mode),
            Payload::GlobalModel { centroids, reply } => {
                self.observe(centroids);
                self.reply(*reply, centroids)
                    .map(|p| p.into_iter().collect())
            }
            other => Err(Error::contract(format!(
                "client {} cannot handle {:?}",
                self.id,
                other.kind()
            ))),
        }
    }

    fn reveal(&self, row: usize, cluster_size: Option<usize>) -> Payload {
        Payload::CentroidReveal {
            point: self.points.row(row).to_vec(),
            cluster_size,
        }
    }

    fn sample(&mut self, mode: SampleMode) -> Result<Vec<Payload>> {
        match mode {
            SampleMode::Uniform => {
                let row = self.rng.random_range(0..self.points.rows());
                Ok(vec![self.reveal(row, None)])
            }
            SampleMode::D2 => {
                let row = sample_weighted(&mut self.rng, &self.dist).ok_or_else(|| {
                    Error::Infeasible(format!("client {} has zero local potential", self.id))
                })?;
                Ok(vec![self.reveal(row, None)])
            }
            SampleMode::LocalSeeding { k } => {
                let idx = kmeanspp_seed_indices(&self.points, None, k, &mut self.rng)?;
                let seeds = CentroidSet::new(self.points.select_rows(&idx))?;
                let sizes = kmeans::assign(&self.points, &seeds)?.sizes;
                Ok(idx
                    .iter()
                    .zip(sizes)
                    .map(|(&row, s)| self.reveal(row, Some(s)))
                    .collect())
            }
        }
    }

    fn reply(&mut self, reply: Reply, centroids: &CentroidSet) -> Result<Option<Payload>> {
        Ok(match reply {
            Reply::Nothing => None,
            Reply::Potential => Some(Payload::PotentialReport {
                potential: self.potential,
            }),
            Reply::LocalUpdate => {
                // empty clusters are dropped by the step itself
                let ones = vec![1.0; self.points.rows()];
                let step = kmeans::lloyd_step(&self.points, &ones, centroids.as_matrix())?;
                self.sizes = Some(step.sizes.clone());
                Some(Payload::LocalUpdate {
                    centroids: step.centroids,
                    sizes: step.sizes,
                })
            }
            Reply::Silhouette(kind) => {
                let (mean, rows) = client_mean_silhouette(&self.points, centroids, kind)?;
                Some(Payload::SilhouetteReport { mean, rows })
            }
            Reply::Vote => {
                let labels = self.labels.as_deref().ok_or_else(|| {
                    Error::contract(format!("client {} has no labels to vote with", self.id))
                })?;
                Some(Payload::VoteReport {
                    votes: client_vote(&self.points, labels, centroids)?,
                })
            }
        })
    }
}
