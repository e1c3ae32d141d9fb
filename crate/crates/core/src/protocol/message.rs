use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::ClusterVote;
use crate::kmeans::CentroidSet;
use crate::matrix::Matrix;
use crate::silhouette::DistanceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Server,
    Client(usize),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Server => write!(f, "server"),
            Party::Client(j) => write!(f, "client-{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMode {
    /// One row, uniformly.
    Uniform,
    /// One row, with probability `d(x, c) / Z_j`.
    D2,
    /// Local k-means++ seeding of up to `k` rows, each revealed with the size
    /// of the cluster it induces on the shard.
    LocalSeeding { k: usize },
}

/// What a client answers after receiving a global model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reply {
    Nothing,
    Potential,
    LocalUpdate,
    Silhouette(DistanceKind),
    Vote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    SizeReport {
        rows: usize,
    },
    PotentialReport {
        potential: f64,
    },
    SampleRequest {
        mode: SampleMode,
    },
    /// Exactly one raw row of the sender's shard.
    CentroidReveal {
        point: Vec<f64>,
        cluster_size: Option<usize>,
    },
    GlobalModel {
        centroids: CentroidSet,
        reply: Reply,
    },
    LocalUpdate {
        centroids: Matrix,
        sizes: Vec<usize>,
    },
    VoteReport {
        votes: Vec<ClusterVote>,
    },
    SilhouetteReport {
        mean: f64,
        rows: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    SizeReport,
    PotentialReport,
    SampleRequest,
    CentroidReveal,
    GlobalModel,
    LocalUpdate,
    VoteReport,
    SilhouetteReport,
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::SizeReport { .. } => MessageKind::SizeReport,
            Payload::PotentialReport { .. } => MessageKind::PotentialReport,
            Payload::SampleRequest { .. } => MessageKind::SampleRequest,
            Payload::CentroidReveal { .. } => MessageKind::CentroidReveal,
            Payload::GlobalModel { .. } => MessageKind::GlobalModel,
            Payload::LocalUpdate { .. } => MessageKind::LocalUpdate,
            Payload::VoteReport { .. } => MessageKind::VoteReport,
            Payload::SilhouetteReport { .. } => MessageKind::SilhouetteReport,
        }
    }

    /// Short human-readable description for trace logs.
    pub fn summary(&self) -> String {
        match self {
            Payload::SizeReport { rows } => format!("rows={rows}"),
            Payload::PotentialReport { potential } => format!("potential={potential}"),
            Payload::SampleRequest { mode } => format!("mode={mode:?}"),
            Payload::CentroidReveal {
                point,
                cluster_size,
            } => match cluster_size {
                Some(s) => format!("dim={} cluster_size={s}", point.len()),
                None => format!("dim={}", point.len()),
            },
            Payload::GlobalModel { centroids, reply } => {
                format!("k={} reply={reply:?}", centroids.k())
            }
            Payload::LocalUpdate { centroids, sizes } => {
                format!(
                    "k={} rows={}",
                    centroids.rows(),
                    sizes.iter().sum::<usize>()
                )
            }
            Payload::VoteReport { votes } => format!("clusters={}", votes.len()),
            Payload::SilhouetteReport { mean, rows } => format!("mean={mean} rows={rows}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    pub sender: Party,
    pub receiver: Party,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}
