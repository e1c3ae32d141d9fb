//! Federated clustering for unsupervised intrusion detection.
//!
//! The crate is organised along the detection pipeline:
//!
//! - [`dataset`]: CSV ingestion, preprocessing, train/test split and
//!   partitioning of the training set into client shards.
//! - [`kmeans`]: centralized primitives (nearest centroid, k-means++ seeding,
//!   weighted Lloyd iterations). The server reuses them for aggregation.
//! - [`protocol`]: the federated layer. Clients and a server exchange typed
//!   messages over an in-process transport; a [`protocol::PrivacyLedger`]
//!   counts every raw point a client discloses.
//! - [`silhouette`]: simplified silhouette, per client and federated.
//! - [`classifier`]: benign-proportion voting per cluster and the usual
//!   detection metrics with attacks as the positive class.
//! - [`harness`]: the experiment driver behind the `fedids` CLI.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod kmeans;
pub mod matrix;
pub mod protocol;
pub mod rng;
pub mod silhouette;
pub mod synth;

pub use classifier::{Label, MetricsReport, VoteTable};
pub use dataset::{Dataset, FederatedDataset, PartitionScheme, RawTable, Schema};
pub use error::{Error, Result};
pub use kmeans::{Assignment, CentroidSet, LloydConfig};
pub use matrix::Matrix;
pub use protocol::{Client, Federation, PrivacyLedger, Server};
pub use silhouette::{DistanceKind, SilhouetteReport};
