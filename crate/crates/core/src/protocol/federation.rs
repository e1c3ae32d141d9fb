use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::client::Client;
use super::ledger::PrivacyLedger;
use super::message::{Message, Party, Payload, Reply, SampleMode};
use super::server::Server;
use super::transport::{Mailbox, TraceRecord, Transport};
use crate::classifier::{aggregate_votes, VoteTable};
use crate::error::{Error, Result};
use crate::kmeans::{self, CentroidSet};
use crate::matrix::Matrix;
use crate::silhouette::{federated_silhouette, DistanceKind, SilhouetteReport};

/// Which federated k-means variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Federated k-means++ seeding, then federated k-means rounds.
    FedKmeansFedInit,
    /// Local k-means++ at every client, one aggregation, then rounds.
    GarstReinders,
}

/// A simulated federation: one server, `N` clients and a transport.
///
/// The server orchestrates sequentially and blocks until every addressed
/// client has answered. Clients handle a broadcast concurrently; replies are
/// posted in client order, so results do not depend on scheduling.
pub struct Federation<T: Transport = Mailbox> {
    server: Server,
    clients: Vec<Client>,
    transport: T,
    ledger: PrivacyLedger,
    trace: Option<Vec<TraceRecord>>,
    seq: u64,
}

impl Federation<Mailbox> {
    pub fn new(clients: Vec<Client>, seed: u64) -> Result<Self> {
        Self::with_transport(clients, seed, Mailbox::default())
    }
}

impl<T: Transport> Federation<T> {
    /// Client `j` must carry id `j`. All parties are reseeded from `seed`.
    pub fn with_transport(mut clients: Vec<Client>, seed: u64, transport: T) -> Result<Self> {
        if clients.is_empty() {
            return Err(Error::contract("a federation needs at least one client"));
        }
        let dim = clients[0].points().cols();
        for (j, c) in clients.iter_mut().enumerate() {
            if c.id() != j {
                return Err(Error::contract(format!(
                    "client at slot {j} has id {}",
                    c.id()
                )));
            }
            if c.points().cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.points().cols(),
                });
            }
            c.reseed(seed);
        }
        Ok(Self {
            server: Server::new(clients.len(), seed),
            ledger: PrivacyLedger::new(clients.len()),
            clients,
            transport,
            trace: None,
            seq: 0,
        })
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn server(&self) -> &Server {
        &self.server
    }

    pub fn server_mut(&mut self) -> &mut Server {
        &mut self.server
    }

    pub fn clients(&self) -> &[Client] {
        &self.clients
    }

    pub fn ledger(&self) -> &PrivacyLedger {
        &self.ledger
    }

    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn total_rows(&self) -> usize {
        self.clients.iter().map(Client::len).sum()
    }

    /// Current global model `c^g`.
    pub fn global_model(&self) -> Option<&CentroidSet> {
        self.server.centroids()
    }

    /// `Σ_x d(x, c^g)` over every shard. A simulation-side diagnostic; no
    /// message is exchanged.
    pub fn global_potential(&self) -> Result<f64> {
        let c = self
            .global_model()
            .ok_or_else(|| Error::contract("no global model yet"))?;
        self.clients
            .iter()
            .map(|cl| kmeans::potential(cl.points(), c))
            .sum()
    }

    fn post(&mut self, sender: Party, receiver: Party, payload: Payload) {
        let msg = Message {
            seq: self.seq,
            sender,
            receiver,
            payload,
        };
        self.seq += 1;
        self.ledger.record(&msg);
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord::new(&msg, &self.ledger));
        }
        self.transport.send(msg);
    }

    fn deliver(&mut self, from: Party, to: Party) -> Result<Payload> {
        self.transport
            .recv(from, to)
            .map(|m| m.payload)
            .ok_or_else(|| Error::contract(format!("no message from {from} to {to}")))
    }

    /// Sends client `j`'s replies and receives them at the server.
    fn relay_replies(&mut self, j: usize, replies: Vec<Payload>) -> Result<Vec<Payload>> {
        let n = replies.len();
        for p in replies {
            self.post(Party::Client(j), Party::Server, p);
        }
        (0..n)
            .map(|_| self.deliver(Party::Client(j), Party::Server))
            .collect()
    }

    /// Server -> client `j`, then its replies back.
    fn exchange(&mut self, j: usize, payload: Payload) -> Result<Vec<Payload>> {
        self.post(Party::Server, Party::Client(j), payload);
        let inbound = self.deliver(Party::Server, Party::Client(j))?;
        let replies = self.clients[j].handle(&inbound)?;
        self.relay_replies(j, replies)
    }

    /// Server -> every client, replies gathered in client order.
    fn broadcast(&mut self, payload: Payload) -> Result<Vec<Vec<Payload>>> {
        let n = self.clients.len();
        for j in 0..n {
            self.post(Party::Server, Party::Client(j), payload.clone());
        }
        let inbound = (0..n)
            .map(|j| self.deliver(Party::Server, Party::Client(j)))
            .collect::<Result<Vec<_>>>()?;
        let replies = self
            .clients
            .par_iter_mut()
            .zip(inbound.par_iter())
            .map(|(c, p)| c.handle(p))
            .collect::<Result<Vec<_>>>()?;
        replies
            .into_iter()
            .enumerate()
            .map(|(j, r)| self.relay_replies(j, r))
            .collect()
    }

    fn expect_reveal(replies: Vec<Payload>) -> Result<Vec<f64>> {
        match replies.into_iter().next() {
            Some(Payload::CentroidReveal { point, .. }) => Ok(point),
            other => Err(Error::contract(format!(
                "expected a centroid reveal, got {other:?}"
            ))),
        }
    }

    /// Federated k-means++ seeding.
    ///
    /// Clients report `|X_j|`; the server picks a client proportionally and
    /// that client reveals one uniform row. For every further seed, clients
    /// report `Z_j` against the current seeds, the server picks a client with
    /// probability `Z_j / Z`, and that client reveals a row drawn with
    /// probability `d(x, c) / Z_j`. Exactly `k` rows are revealed.
    pub fn init_kmeanspp(&mut self, k: usize) -> Result<CentroidSet> {
        if k == 0 {
            return Err(Error::contract("k must be at least 1"));
        }
        if self.total_rows() < k {
            return Err(Error::Infeasible(format!(
                "k = {k} exceeds the {} pooled rows",
                self.total_rows()
            )));
        }
        for j in 0..self.clients.len() {
            let report = self.clients[j].size_report();
            let p = self.relay_replies(j, vec![report])?;
            self.server.record(j, &p[0])?;
        }
        let first = self.server.pick_by_size()?;
        let reveal = self.exchange(
            first,
            Payload::SampleRequest {
                mode: SampleMode::Uniform,
            },
        )?;
        let mut seeds = Matrix::empty(self.clients[0].points().cols());
        seeds.push_row(&Self::expect_reveal(reveal)?)?;

        while seeds.rows() < k {
            let current = CentroidSet::new(seeds.clone())?;
            let reports = self.broadcast(Payload::GlobalModel {
                centroids: current,
                reply: Reply::Potential,
            })?;
            for (j, r) in reports.iter().enumerate() {
                self.server.record(j, &r[0])?;
            }
            let Some(j) = self.server.pick_by_potential() else {
                return Err(Error::Infeasible(format!(
                    "only {} distinct rows for k = {k}",
                    seeds.rows()
                )));
            };
            let reveal = self.exchange(
                j,
                Payload::SampleRequest {
                    mode: SampleMode::D2,
                },
            )?;
            seeds.push_row(&Self::expect_reveal(reveal)?)?;
        }
        let seeds = CentroidSet::new(seeds)?;
        self.server.set_centroids(seeds.clone());
        Ok(seeds)
    }

    /// Baseline seeding: every client runs k-means++ locally and reveals its
    /// seeds with their local cluster sizes (`k` rows per client when the
    /// shard has `k` distinct rows); the server clusters them into `k`
    /// centroids with weighted k-means.
    pub fn init_garst_reinders(&mut self, k: usize) -> Result<CentroidSet> {
        if k == 0 {
            return Err(Error::contract("k must be at least 1"));
        }
        if self.total_rows() < k {
            return Err(Error::Infeasible(format!(
                "k = {k} exceeds the {} pooled rows",
                self.total_rows()
            )));
        }
        let replies = self.broadcast(Payload::SampleRequest {
            mode: SampleMode::LocalSeeding { k },
        })?;
        let mut points = Matrix::empty(self.clients[0].points().cols());
        let mut sizes = Vec::new();
        for p in replies.into_iter().flatten() {
            match p {
                Payload::CentroidReveal {
                    point,
                    cluster_size: Some(s),
                } => {
                    points.push_row(&point)?;
                    sizes.push(s);
                }
                other => {
                    return Err(Error::contract(format!(
                        "expected a sized centroid reveal, got {:?}",
                        other.kind()
                    )))
                }
            }
        }
        self.server.aggregate_cold(&points, &sizes, k)
    }

    /// One round of federated k-means.
    ///
    /// Each client adopts `c^g`, drops centroids without rows, runs one Lloyd
    /// step and sends `(c^j, s^j)`. The server concatenates the updates and
    /// runs weighted Lloyd from `c^g` to convergence.
    pub fn round(&mut self) -> Result<CentroidSet> {
        let global = self
            .global_model()
            .cloned()
            .ok_or_else(|| Error::contract("round before initialization"))?;
        let updates = self.broadcast(Payload::GlobalModel {
            centroids: global.clone(),
            reply: Reply::LocalUpdate,
        })?;
        let mut points = Matrix::empty(global.dim());
        let mut sizes = Vec::new();
        for p in updates.into_iter().flatten() {
            let Payload::LocalUpdate {
                centroids,
                sizes: s,
            } = p
            else {
                return Err(Error::contract("expected a local update"));
            };
            for row in centroids.iter_rows() {
                points.push_row(row)?;
            }
            sizes.extend(s);
        }
        self.server.aggregate(&points, &sizes)
    }

    /// Seeds with `protocol`, then runs `rounds` rounds. Returns the global
    /// potential after seeding and after each round.
    pub fn run(&mut self, protocol: Protocol, k: usize, rounds: usize) -> Result<Vec<f64>> {
        match protocol {
            Protocol::FedKmeansFedInit => self.init_kmeanspp(k)?,
            Protocol::GarstReinders => self.init_garst_reinders(k)?,
        };
        let mut series = vec![self.global_potential()?];
        for _ in 0..rounds {
            self.round()?;
            series.push(self.global_potential()?);
        }
        Ok(series)
    }

    /// Federated simplified silhouette of `centroids`.
    pub fn silhouette(
        &mut self,
        centroids: &CentroidSet,
        distance: DistanceKind,
    ) -> Result<SilhouetteReport> {
        if centroids.k() < 2 {
            return Err(Error::UndefinedSilhouette);
        }
        let replies = self.broadcast(Payload::GlobalModel {
            centroids: centroids.clone(),
            reply: Reply::Silhouette(distance),
        })?;
        let per_client = replies
            .into_iter()
            .map(|r| match r.into_iter().next() {
                Some(Payload::SilhouetteReport { mean, rows }) => Ok((mean, rows)),
                _ => Err(Error::contract("expected a silhouette report")),
            })
            .collect::<Result<Vec<_>>>()?;
        let score = federated_silhouette(&per_client)?;
        Ok(SilhouetteReport { per_client, score })
    }

    /// Collects per-cluster votes and aggregates them into cluster labels.
    pub fn votes(&mut self, centroids: &CentroidSet) -> Result<VoteTable> {
        let replies = self.broadcast(Payload::GlobalModel {
            centroids: centroids.clone(),
            reply: Reply::Vote,
        })?;
        let tables = replies
            .into_iter()
            .map(|r| match r.into_iter().next() {
                Some(Payload::VoteReport { votes }) => Ok(votes),
                _ => Err(Error::contract("expected a vote report")),
            })
            .collect::<Result<Vec<_>>>()?;
        aggregate_votes(&tables)
    }
}

/// Output of a complete federated run.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedRun {
    pub centroids: CentroidSet,
    pub ledger: PrivacyLedger,
    /// Global potential after seeding and after each round.
    pub potentials: Vec<f64>,
}

fn run_protocol(
    protocol: Protocol,
    clients: Vec<Client>,
    k: usize,
    rounds: usize,
    seed: u64,
) -> Result<FederatedRun> {
    let mut fed = Federation::new(clients, seed)?;
    let potentials = fed.run(protocol, k, rounds)?;
    Ok(FederatedRun {
        centroids: fed.global_model().cloned().expect("set by run"),
        ledger: fed.ledger().clone(),
        potentials,
    })
}

/// Federated k-means++ seeding followed by `rounds` federated k-means rounds.
/// With `rounds = 0` the seeds are the model.
pub fn run_federated_kmeans(
    clients: Vec<Client>,
    k: usize,
    rounds: usize,
    seed: u64,
) -> Result<FederatedRun> {
    run_protocol(Protocol::FedKmeansFedInit, clients, k, rounds, seed)
}

/// Baseline with local seeding at every client. With `rounds = 0` the model
/// is the single aggregation of the local seeds.
pub fn run_garst_reinders(
    clients: Vec<Client>,
    k: usize,
    rounds: usize,
    seed: u64,
) -> Result<FederatedRun> {
    run_protocol(Protocol::GarstReinders, clients, k, rounds, seed)
}

/// [`Federation::init_kmeanspp`] on a fresh federation.
pub fn fed_kmeanspp_init(
    clients: Vec<Client>,
    k: usize,
    seed: u64,
) -> Result<(CentroidSet, PrivacyLedger)> {
    let mut fed = Federation::new(clients, seed)?;
    let c = fed.init_kmeanspp(k)?;
    Ok((c, fed.ledger().clone()))
}
