//! Flow-record ingestion and federated dataset construction.

mod load;
mod partition;
mod preprocess;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use load::{load_csv, Cell, RawTable, Schema};
pub use partition::{partition_federated, split_train_test, FederatedDataset, PartitionScheme};
pub use preprocess::{preprocess, DEFAULT_SELECTION_THRESHOLD};

/// Ground truth of a flow. Attacks are the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Attack,
}

impl Label {
    pub fn is_attack(self) -> bool {
        self == Label::Attack
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Attack => "attack",
        }
    }
}

/// Preprocessed feature matrix with optional labels and row metadata.
///
/// Every feature value is finite and lies in `[0, 1]`; row ids are unique.
/// Class and key columns ride along for partitioning but are never features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Option<Vec<Label>>,
    row_ids: Vec<u64>,
    feature_names: Vec<String>,
    classes: Option<Vec<String>>,
    keys: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Option<Vec<Label>>,
        row_ids: Vec<u64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Self {
            features,
            labels,
            row_ids,
            feature_names,
            classes: None,
            keys: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_classes(mut self, classes: Vec<String>) -> Result<Self> {
        check_len("class column", classes.len(), self.len())?;
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn with_keys(mut self, keys: Vec<String>) -> Result<Self> {
        check_len("key column", keys.len(), self.len())?;
        self.keys = Some(keys);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.features.rows();
        check_len("row ids", self.row_ids.len(), n)?;
        if let Some(l) = &self.labels {
            check_len("labels", l.len(), n)?;
        }
        if self.feature_names.len() != self.features.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.features.cols(),
                found: self.feature_names.len(),
            });
        }
        if let Some(v) = self
            .features
            .as_slice()
            .iter()
            .find(|v| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::contract(format!("feature value {v} outside [0, 1]")));
        }
        let mut seen = HashSet::with_capacity(n);
        if let Some(id) = self.row_ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::contract(format!("duplicate row id {id}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn classes(&self) -> Option<&[String]> {
        self.classes.as_deref()
    }

    pub fn keys(&self) -> Option<&[String]> {
        self.keys.as_deref()
    }

    /// Subset of rows, metadata included, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let pick = |v: &Vec<String>| indices.iter().map(|&i| v[i].clone()).collect();
        Self {
            features: self.features.select_rows(indices),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
            feature_names: self.feature_names.clone(),
            classes: self.classes.as_ref().map(pick),
            keys: self.keys.as_ref().map(pick),
        }
    }

    /// Debug dump of the preprocessed matrix: `row_id`, features, then `label`
    /// when labels are present.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        let mut header = vec!["row_id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.features.iter_rows().enumerate() {
            let mut rec = vec![self.row_ids[i].to_string()];
            rec.extend(row.iter().map(f64::to_string));
            if let Some(l) = &self.labels {
                rec.push(l[i].as_str().to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn check_len(what: &str, got: usize, rows: usize) -> Result<()> {
    if got != rows {
        return Err(Error::contract(format!(
            "{what} has {got} entries for {rows} rows"
        )));
    }
    Ok(())
}
