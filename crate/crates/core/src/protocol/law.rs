//! Exact probability law of federated k-means++ seeding.
//!
//! Evaluates the product of server-side client selection masses and
//! client-side row masses along a seed sequence, using the same [`Client`]
//! and [`Server`] weight functions the sampling code draws from.

use super::client::Client;
use super::message::Payload;
use super::server::Server;
use crate::error::{Error, Result};
use crate::kmeans::CentroidSet;
use crate::matrix::Matrix;

/// Probability that seeding reveals `sequence` in order. Each entry is
/// `(client, row within that client's shard)`.
pub fn federated_sequence_probability(
    shards: &[Matrix],
    sequence: &[(usize, usize)],
) -> Result<f64> {
    let Some(&(j0, r0)) = sequence.first() else {
        return Ok(1.0);
    };
    let mut clients = shards
        .iter()
        .enumerate()
        .map(|(j, s)| Client::new(j, s.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut server = Server::new(clients.len(), 0);
    for c in &clients {
        server.record(c.id(), &c.size_report())?;
    }
    let check = |j: usize, r: usize| -> Result<()> {
        if j >= shards.len() || r >= shards[j].rows() {
            return Err(Error::contract(format!("no row {r} at client {j}")));
        }
        Ok(())
    };
    check(j0, r0)?;
    let sizes = server.size_weights()?;
    let mut p = sizes[j0] / sizes.iter().sum::<f64>() * (1.0 / clients[j0].len() as f64);

    let mut seeds = Matrix::empty(shards[0].cols());
    seeds.push_row(shards[j0].row(r0))?;
    for &(j, r) in &sequence[1..] {
        check(j, r)?;
        let current = CentroidSet::new(seeds.clone())?;
        for c in clients.iter_mut() {
            c.observe(&current);
            server.record(
                c.id(),
                &Payload::PotentialReport {
                    potential: c.potential(),
                },
            )?;
        }
        let z = server.total_potential();
        let zj = server.potential_weights()[j];
        if z == 0.0 || zj == 0.0 {
            return Ok(0.0);
        }
        p *= zj / z * (clients[j].d2_weights()[r] / zj);
        seeds.push_row(shards[j].row(r))?;
    }
    Ok(p)
}
