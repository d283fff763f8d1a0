//! Counter-based derivation of independent random streams.
//!
//! Every random draw in a simulation comes from a ChaCha8 stream whose seed
//! is a hash of `(root seed, path)`. The path names the consumer, e.g.
//! `[trial, CHANNEL]` or `[trial, KACZMARZ, subarray, column]`, so the values
//! a trial sees never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream roles used in derivation paths.
pub mod role {
    pub const CHANNEL: u64 = 0x4348;
    pub const KACZMARZ: u64 = 0x4b41;
    pub const SYMBOLS: u64 = 0x5359;
    pub const NOISE: u64 = 0x4e4f;
}

/// Root of a tree of deterministic random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// A child tree; `child(a).rng(&[b])` equals `rng(&[a, b])`.
    pub fn child(&self, index: u64) -> Streams {
        Streams {
            root: mix(self.root, index),
        }
    }

    pub fn rng(&self, path: &[u64]) -> ChaCha8Rng {
        let key = path.iter().fold(self.root, |acc, &p| mix(acc, p));
        ChaCha8Rng::seed_from_u64(splitmix64(key))
    }
}

fn mix(acc: u64, value: u64) -> u64 {
    splitmix64(acc ^ splitmix64(value.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
