use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Shuffles with a generator seeded by `seed`, then cuts the first
/// `floor(train_fraction * n)` rows off as the training set.
pub fn split_train_test(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::contract(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (train_fraction * data.len() as f64).floor() as usize;
    let (train, test) = order.split_at(cut);
    Ok((data.select(train), data.select(test)))
}

/// How the training set is divided among clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionScheme {
    /// One client per attack category (plus one for normal traffic).
    ByClass,
    /// One client per key value; keys owning fewer than `min_rows` rows are
    /// merged into a trailing overflow client.
    ByKey {
        #[serde(default = "default_min_rows")]
        min_rows: usize,
    },
    /// Round-robin over `shards` clients.
    ByHash { shards: usize },
}

fn default_min_rows() -> usize {
    20
}

impl PartitionScheme {
    pub fn by_key() -> Self {
        PartitionScheme::ByKey {
            min_rows: default_min_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederatedDataset {
    pub shards: Vec<Dataset>,
    pub scheme: PartitionScheme,
}

impl FederatedDataset {
    pub fn n_clients(&self) -> usize {
        self.shards.len()
    }

    pub fn total_rows(&self) -> usize {
        self.shards.iter().map(Dataset::len).sum()
    }
}

/// Splits `train` into disjoint, non-empty client shards.
///
/// `aux` overrides the key column captured at load time for
/// [`PartitionScheme::ByKey`]. Group order follows first appearance in `train`.
pub fn partition_federated(
    train: &Dataset,
    scheme: PartitionScheme,
    aux: Option<&[String]>,
) -> Result<FederatedDataset> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let groups: Vec<Vec<usize>> = match scheme {
        PartitionScheme::ByClass => {
            let classes = train
                .classes()
                .ok_or_else(|| Error::Config("by-class partition needs a class column".into()))?;
            group_by(classes)
        }
        PartitionScheme::ByKey { min_rows } => {
            let keys = aux
                .or(train.keys())
                .ok_or_else(|| Error::Config("by-key partition needs a key column".into()))?;
            if keys.len() != train.len() {
                return Err(Error::Config(format!(
                    "{} partition keys for {} rows",
                    keys.len(),
                    train.len()
                )));
            }
            let (mut big, overflow): (Vec<_>, Vec<_>) = group_by(keys)
                .into_iter()
                .partition(|g| g.len() >= min_rows);
            let mut rest: Vec<usize> = overflow.into_iter().flatten().collect();
            rest.sort_unstable();
            if !rest.is_empty() {
                big.push(rest);
            }
            big
        }
        PartitionScheme::ByHash { shards } => {
            if shards == 0 || shards > train.len() {
                return Err(Error::Config(format!(
                    "cannot deal {} rows round-robin into {shards} shards",
                    train.len()
                )));
            }
            let mut groups = vec![Vec::new(); shards];
            for i in 0..train.len() {
                groups[i % shards].push(i);
            }
            groups
        }
    };
    Ok(FederatedDataset {
        shards: groups.iter().map(|g| train.select(g)).collect(),
        scheme,
    })
}

fn group_by(values: &[String]) -> Vec<Vec<usize>> {
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let g = *slot.entry(v.as_str()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}
