//! Seeded, splittable random streams.
//!
//! Every randomized computation takes a 64-bit master seed. Independent
//! workers (trial shards, bootstrap runs, seesaw starts) draw from
//! `stream(master, index)`: a ChaCha8 generator keyed by the master seed with
//! the stream counter set to `index`. Streams never overlap, and a given
//! `(master, index)` pair yields the same sequence no matter which thread
//! runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Environment variable consulted by the CLI for a default master seed.
pub const SEED_ENV: &str = "EACODE_SEED";

pub fn stream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
