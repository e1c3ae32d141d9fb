use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{PartitionScheme, Schema, DEFAULT_SELECTION_THRESHOLD};
use crate::error::{Error, Result};
use crate::protocol::Protocol;
use crate::silhouette::DistanceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Centralized,
    GarstReinders,
    FedKmeansFedInit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Centralized,
        Algorithm::GarstReinders,
        Algorithm::FedKmeansFedInit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Centralized => "centralized",
            Algorithm::GarstReinders => "garst-reinders",
            Algorithm::FedKmeansFedInit => "fed-kmeans-fed-init",
        }
    }

    /// Row label used in the summary table.
    pub fn model_name(self) -> &'static str {
        match self {
            Algorithm::Centralized => "k-means (centralized)",
            Algorithm::GarstReinders => "Garst&Reinders",
            Algorithm::FedKmeansFedInit => "Fed. k-means & fed. k-means++",
        }
    }

    pub fn protocol(self) -> Option<Protocol> {
        match self {
            Algorithm::Centralized => None,
            Algorithm::GarstReinders => Some(Protocol::GarstReinders),
            Algorithm::FedKmeansFedInit => Some(Protocol::FedKmeansFedInit),
        }
    }

    pub fn is_federated(self) -> bool {
        self != Algorithm::Centralized
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub schema: Schema,
    #[serde(default = "default_threshold")]
    pub selection_threshold: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_SELECTION_THRESHOLD
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Step while `k < coarse_above`.
    pub k_stride: usize,
    pub coarse_above: usize,
    pub coarse_stride: usize,
    pub rounds: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 70,
            k_stride: 1,
            coarse_above: 70,
            coarse_stride: 4,
            rounds: vec![0, 5, 10],
            algorithms: Algorithm::ALL.to_vec(),
        }
    }
}

impl SweepConfig {
    /// Increasing list of `k` values to train.
    pub fn k_grid(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut k = self.k_min;
        while k <= self.k_max {
            out.push(k);
            k += if k < self.coarse_above {
                self.k_stride
            } else {
                self.coarse_stride
            };
        }
        out
    }

    /// Sorted, de-duplicated round counts.
    pub fn round_values(&self) -> Vec<usize> {
        let mut r = self.rounds.clone();
        r.sort_unstable();
        r.dedup();
        r
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SelectionMode {
    #[default]
    Auto,
    /// Fixed model; `r` is ignored for the centralized algorithm.
    Manual { k: usize, r: usize },
}

/// Which split the clients vote on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteSet {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub silhouette_distance: DistanceKind,
    #[serde(default)]
    pub vote_on: VoteSet,
    #[serde(default)]
    pub selection: SelectionMode,
    pub data: DataConfig,
    pub partition: PartitionScheme,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data and output paths resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            if cfg.data.path.is_relative() {
                cfg.data.path = base.join(&cfg.data.path);
            }
            if cfg.output_dir.is_relative() {
                cfg.output_dir = base.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.k_min == 0 || s.k_min > s.k_max {
            return Err(Error::Config(format!(
                "k range {}..={} must be non-empty and start at 1 or more",
                s.k_min, s.k_max
            )));
        }
        if s.k_stride == 0 || s.coarse_stride == 0 {
            return Err(Error::Config("k strides must be positive".into()));
        }
        if s.algorithms.is_empty() {
            return Err(Error::Config("no algorithms to sweep".into()));
        }
        if s.rounds.is_empty() && s.algorithms.iter().any(|a| a.is_federated()) {
            return Err(Error::Config(
                "federated algorithms need at least one r value".into(),
            ));
        }
        let f = self.data.train_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("train fraction {f} outside (0, 1)")));
        }
        if !(0.0..=1.0).contains(&self.data.selection_threshold) {
            return Err(Error::Config(format!(
                "selection threshold {} outside [0, 1]",
                self.data.selection_threshold
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [data]
        path = "flows.csv"
        [partition]
        scheme = "by-class"
    "#;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.sweep.rounds, vec![0, 5, 10]);
        assert_eq!(c.data.selection_threshold, 0.99);
        assert_eq!(c.data.train_fraction, 0.8);
        assert_eq!(c.selection, SelectionMode::Auto);
        assert_eq!(c.silhouette_distance, DistanceKind::Squared);
        let grid = c.sweep.k_grid();
        assert_eq!(grid[..3], [1, 2, 3]);
        assert_eq!(*grid.last().unwrap(), 70);
    }

    #[test]
    fn coarse_stride_above_threshold() {
        let s = SweepConfig {
            k_min: 60,
            k_max: 90,
            ..SweepConfig::default()
        };
        let g = s.k_grid();
        assert!(g.contains(&70) && g.contains(&74) && g.contains(&90));
        assert!(!g.contains(&71));
    }

    #[test]
    fn full_config() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 9
            silhouette_distance = "euclidean"
            vote_on = "test"
            [selection]
            mode = "manual"
            k = 27
            r = 5
            [data]
            path = "x.csv"
            selection_threshold = 0.95
            [data.schema]
            label_column = "Label"
            benign_value = "BENIGN"
            key_column = "Destination IP"
            ignore_columns = ["Flow ID"]
            [partition]
            scheme = "by-key"
            min_rows = 5
            [sweep]
            k_min = 2
            k_max = 300
            rounds = [0]
            algorithms = ["fed-kmeans-fed-init"]
        "#,
        )
        .unwrap();
        assert_eq!(c.selection, SelectionMode::Manual { k: 27, r: 5 });
        assert_eq!(c.partition, PartitionScheme::ByKey { min_rows: 5 });
        assert_eq!(c.data.schema.benign_value, "BENIGN");
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_ranges() {
        let bad = format!("{MINIMAL}\n[sweep]\nk_min = 5\nk_max = 2\n");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad),
            Err(Error::Config(_))
        ));
        let bad = format!("{MINIMAL}\n[sweep]\nk_min = 0\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let typo = format!("sed = 3\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let typo = MINIMAL.replace("by-class", "by-key\nmin_row = 3");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("kmeans".parse::<Algorithm>().is_err());
    }
}
