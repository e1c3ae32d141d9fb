//! Synthetic flow fixtures: isotropic Gaussian blobs with a planted class
//! and benign/attack label per blob.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub center: Vec<f64>,
    pub std_dev: f64,
    pub rows: usize,
    pub class: String,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSample {
    pub points: Matrix,
    /// Blob index per row.
    pub blob: Vec<usize>,
    pub blobs: Vec<Blob>,
}

impl BlobSample {
    pub fn labels(&self) -> Vec<Label> {
        self.blob.iter().map(|&b| self.blobs[b].label).collect()
    }

    pub fn classes(&self) -> Vec<String> {
        self.blob
            .iter()
            .map(|&b| self.blobs[b].class.clone())
            .collect()
    }

    /// Writes `f0..f{d-1},attack_cat,label` with label `0` for benign rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for j in 0..self.points.cols() {
            text.push_str(&format!("f{j},"));
        }
        text.push_str("attack_cat,label\n");
        for (row, &b) in self.points.iter_rows().zip(&self.blob) {
            for v in row {
                text.push_str(&format!("{v},"));
            }
            let blob = &self.blobs[b];
            let label = if blob.label == Label::Benign { 0 } else { 1 };
            text.push_str(&format!("{},{label}\n", blob.class));
        }
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Samples every blob in turn; rows are grouped by blob.
pub fn gaussian_blobs(blobs: &[Blob], seed: u64) -> Result<BlobSample> {
    let dim = blobs
        .first()
        .map(|b| b.center.len())
        .ok_or_else(|| Error::contract("no blobs"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Matrix::empty(dim);
    let mut blob = Vec::new();
    for (i, b) in blobs.iter().enumerate() {
        let noise =
            Normal::new(0.0, b.std_dev).map_err(|e| Error::contract(format!("blob {i}: {e}")))?;
        for _ in 0..b.rows {
            let row: Vec<f64> = b
                .center
                .iter()
                .map(|c| c + noise.sample(&mut rng))
                .collect();
            points.push_row(&row)?;
            blob.push(i);
        }
    }
    Ok(BlobSample {
        points,
        blob,
        blobs: blobs.to_vec(),
    })
}

/// Three well-separated 2-D blobs inside the unit square: one benign, two
/// attack classes.
pub fn three_blobs(rows_per_blob: usize, std_dev: f64, seed: u64) -> Result<BlobSample> {
    let blob = |x: f64, y: f64, class: &str, label| Blob {
        center: vec![x, y],
        std_dev,
        rows: rows_per_blob,
        class: class.into(),
        label,
    };
    gaussian_blobs(
        &[
            blob(0.2, 0.2, "normal", Label::Benign),
            blob(0.8, 0.25, "dos", Label::Attack),
            blob(0.5, 0.8, "exploits", Label::Attack),
        ],
        seed,
    )
}
