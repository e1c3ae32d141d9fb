use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig, VoteSet};
use crate::classifier::{aggregate_votes, client_vote, predict, score, MetricsReport};
use crate::dataset::{
    load_csv, partition_federated, preprocess, split_train_test, Dataset, FederatedDataset,
};
use crate::error::{Error, Result};
use crate::kmeans::{self, distinct_rows, CentroidSet};
use crate::protocol::{write_trace, Client, Federation, LedgerSummary};
use crate::rng::{derive_seed, label_hash};
use crate::silhouette::silhouette_report;

/// Train/test split and client shards for one experiment.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub federated: FederatedDataset,
}

/// Loads, preprocesses, splits and partitions the configured dataset.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedData> {
    let table = load_csv(&config.data.path, &config.data.schema)?;
    let data = preprocess(&table, config.data.selection_threshold)?;
    if data.labels().is_none() {
        return Err(Error::Config(
            "the experiment needs a label column to vote and score".into(),
        ));
    }
    let split_seed = derive_seed(config.seed, &[label_hash("split")]);
    let (train, test) = split_train_test(&data, config.data.train_fraction, split_seed)?;
    if test.is_empty() {
        return Err(Error::Config("the test split is empty".into()));
    }
    let federated = partition_federated(&train, config.partition, None)?;
    Ok(PreparedData {
        train,
        test,
        federated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Centroids in the final model; below `k` when clusters emptied out.
    pub k_effective: usize,
    /// Federated simplified silhouette on the training shards; `None` for a
    /// single-centroid model.
    pub silhouette: Option<f64>,
    pub metrics: MetricsReport,
    pub ledger: LedgerSummary,
    /// Global potential after seeding and after each round.
    pub potentials: Vec<f64>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed(RunMetrics),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Rounds of communication; `None` for the centralized algorithm.
    pub r: Option<usize>,
    pub seed: u64,
    pub outcome: Outcome,
}

impl RunRecord {
    pub fn metrics(&self) -> Option<&RunMetrics> {
        match &self.outcome {
            Outcome::Completed(m) => Some(m),
            Outcome::Skipped { .. } => None,
        }
    }

    pub fn silhouette(&self) -> Option<f64> {
        self.metrics().and_then(|m| m.silhouette)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub n_clients: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub features: usize,
    /// One record per `(algorithm, k, r)`, ordered by that key.
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn runs_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &RunRecord> + '_ {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn find(&self, algorithm: Algorithm, k: usize, r: Option<usize>) -> Option<&RunRecord> {
        self.runs
            .iter()
            .find(|x| x.algorithm == algorithm && x.k == k && x.r == r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Seed of one combination, derived from the root seed.
pub fn combination_seed(root: u64, algorithm: Algorithm, k: usize, r: Option<usize>) -> u64 {
    let r = r.map_or(u64::MAX, |r| r as u64);
    derive_seed(root, &[label_hash(algorithm.as_str()), k as u64, r])
}

fn combinations(config: &ExperimentConfig) -> Vec<(Algorithm, usize, Option<usize>)> {
    let mut algos = config.sweep.algorithms.clone();
    algos.sort_unstable();
    algos.dedup();
    let ks = config.sweep.k_grid();
    let rs = config.sweep.round_values();
    let mut out = Vec::new();
    for a in algos {
        for &k in &ks {
            if a.is_federated() {
                out.extend(rs.iter().map(|&r| (a, k, Some(r))));
            } else {
                out.push((a, k, None));
            }
        }
    }
    out
}

/// Runs every configured combination.
pub fn sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    sweep_with(config, None)
}

/// [`sweep`], also writing one NDJSON protocol trace per federated run into
/// `trace_dir` when given.
pub fn sweep_with(config: &ExperimentConfig, trace_dir: Option<&Path>) -> Result<ExperimentReport> {
    config.validate()?;
    let data = prepare(config)?;
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let runs = combinations(config)
        .into_par_iter()
        .map(|(a, k, r)| {
            let seed = combination_seed(config.seed, a, k, r);
            let trace = trace_dir
                .map(|d| d.join(format!("{}_k{k}_r{}.ndjson", a.as_str(), r.unwrap_or(0))));
            let outcome = match run_combination(
                config,
                &data,
                a,
                k,
                r.unwrap_or(0),
                seed,
                trace.as_deref(),
            ) {
                Ok(m) => Outcome::Completed(m),
                Err(Error::Infeasible(reason)) => Outcome::Skipped { reason },
                Err(e) => return Err(e),
            };
            Ok(RunRecord {
                algorithm: a,
                k,
                r,
                seed,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config_hash: config.hash(),
        config: config.clone(),
        n_clients: data.federated.n_clients(),
        train_rows: data.train.len(),
        test_rows: data.test.len(),
        features: data.train.dim(),
        runs,
    })
}

/// Trains and evaluates one `(algorithm, k, r)` combination.
pub fn run_combination(
    config: &ExperimentConfig,
    data: &PreparedData,
    algorithm: Algorithm,
    k: usize,
    rounds: usize,
    seed: u64,
    trace: Option<&Path>,
) -> Result<RunMetrics> {
    let start = Instant::now();
    let distance = config.silhouette_distance;
    let (model, silhouette, votes, ledger, potentials) = match algorithm.protocol() {
        None => {
            let points = data.train.features();
            let distinct = distinct_rows(points);
            if k > distinct {
                return Err(Error::Infeasible(format!(
                    "k = {k} exceeds the {distinct} distinct training rows"
                )));
            }
            let out = kmeans::kmeans(points, k, seed, Default::default())?;
            let model = out.centroids;
            let silhouette = if model.k() < 2 {
                None
            } else {
                Some(silhouette_report(&[points], &model, distance)?.score)
            };
            let votes = match config.vote_on {
                VoteSet::Train => vote_pooled(&data.train, &model)?,
                VoteSet::Test => vote_pooled(&data.test, &model)?,
            };
            let potentials = vec![*out.inertia.last().expect("non-empty")];
            (
                model,
                silhouette,
                votes,
                LedgerSummary::default(),
                potentials,
            )
        }
        Some(protocol) => {
            let clients = data
                .federated
                .shards
                .iter()
                .enumerate()
                .map(|(j, s)| Client::from_dataset(j, s))
                .collect::<Result<Vec<_>>>()?;
            let mut fed = Federation::new(clients, seed)?;
            if trace.is_some() {
                fed.enable_trace();
            }
            let potentials = fed.run(protocol, k, rounds)?;
            let model = fed.global_model().cloned().expect("set by run");
            let silhouette = if model.k() < 2 {
                None
            } else {
                Some(fed.silhouette(&model, distance)?.score)
            };
            let votes = match config.vote_on {
                VoteSet::Train => fed.votes(&model)?,
                VoteSet::Test => vote_pooled(&data.test, &model)?,
            };
            if let Some(path) = trace {
                let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
                write_trace(fed.trace(), std::io::BufWriter::new(f))
                    .map_err(|e| Error::io(path, e))?;
            }
            (model, silhouette, votes, fed.ledger().summary(), potentials)
        }
    };
    let truth = data.test.labels().expect("checked in prepare");
    let predictions = predict(data.test.features(), &model, &votes)?;
    Ok(RunMetrics {
        k_effective: model.k(),
        silhouette,
        metrics: score(&predictions, truth)?,
        ledger,
        potentials,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn vote_pooled(data: &Dataset, model: &CentroidSet) -> Result<crate::classifier::VoteTable> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::contract("voting needs labels"))?;
    aggregate_votes(&[client_vote(data.features(), labels, model)?])
}
