//! Fixtures shared by the benchmarks.

use fedids::synth::{gaussian_blobs, Blob};
use fedids::{Client, Label, Matrix};

/// `rows` points in `dim` dimensions drawn around `centers` blob centres.
pub fn blobs(rows: usize, dim: usize, centers: usize, seed: u64) -> Matrix {
    let layout: Vec<Blob> = (0..centers)
        .map(|c| Blob {
            center: (0..dim)
                .map(|d| ((c * 7 + d * 3) % 10) as f64 / 10.0)
                .collect(),
            std_dev: 0.05,
            rows: rows / centers,
            class: format!("c{c}"),
            label: if c == 0 { Label::Benign } else { Label::Attack },
        })
        .collect();
    gaussian_blobs(&layout, seed).expect("valid blobs").points
}

/// Deals `points` round-robin to `n` clients.
pub fn clients(points: &Matrix, n: usize) -> Vec<Client> {
    (0..n)
        .map(|j| {
            let idx: Vec<usize> = (j..points.rows()).step_by(n).collect();
            Client::new(j, points.select_rows(&idx)).expect("non-empty shard")
        })
        .collect()
}
