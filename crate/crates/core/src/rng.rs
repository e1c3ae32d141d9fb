//! Seed derivation and categorical sampling.
//!
//! Every party of a simulated federation draws from its own ChaCha stream
//! keyed by one root seed. Client `j` uses stream `j`, the server uses
//! [`SERVER_STREAM`]. Centralized seeding uses stream 0, so a single-client
//! federation consumes exactly the same draws as the centralized run.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type PartyRng = ChaCha8Rng;

pub const SERVER_STREAM: u64 = u64::MAX;

pub fn party_rng(seed: u64, stream: u64) -> PartyRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a root seed and a path of integers.
/// Stable across platforms and releases.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Hashes a label into a `u64` for use in [`derive_seed`] paths (FNV-1a).
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Draws an index with probability proportional to `weights[i]`.
///
/// Returns `None` when the weights carry no mass. Zero-weight entries are
/// never drawn.
pub fn sample_weighted<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let dist = WeightedIndex::new(weights.iter().copied()).ok()?;
    Some(dist.sample(rng))
}
