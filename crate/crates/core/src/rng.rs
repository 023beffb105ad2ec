//! Reproducible random-number streams.
//!
//! A stream is identified by `(master_seed, stream_id)`. The generator is
//! ChaCha8 keyed by `master_seed` (expanded through `SeedableRng::seed_from_u64`,
//! which is PCG32-based and fixed by the `rand_core` API), with its 64-bit
//! stream word set to `stream_id`. ChaCha output depends only on key, stream
//! and position, so results are identical on every platform.
//!
//! Stream ids for simulation work items are derived from a domain tag and the
//! work-item indices with [`stream_id`], which folds each word through the
//! SplitMix64 finalizer:
//!
//! ```text
//! h = 0x9E37_79B9_7F4A_7C15
//! for w in [tag, i0, i1, ...]: h = splitmix64(h ^ w)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Stream for a tagged work item, see [`stream_id`].
    pub fn derive(master_seed: u64, tag: u64, indices: &[u64]) -> Self {
        Self::new(master_seed, stream_id(tag, indices))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a domain tag and work-item indices into a stream id.
pub fn stream_id(tag: u64, indices: &[u64]) -> u64 {
    let mut h = splitmix64(0x9E37_79B9_7F4A_7C15 ^ tag);
    for &i in indices {
        h = splitmix64(h ^ i);
    }
    h
}

/// Domain tags keeping channel, noise and other draws on disjoint streams.
pub mod tags {
    pub const CHANNEL: u64 = 0x4348_414e; // "CHAN"
    pub const SEP_NOISE: u64 = 0x5345_504e; // "SEPN"
    pub const MI_NOISE: u64 = 0x4d49_4e53; // "MINS"
}
