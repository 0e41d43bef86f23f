//! Counter-based random streams.
//!
//! Every random draw in a run comes from a ChaCha8 stream whose key is a hash
//! of `(seed, domain, a, b, c)`. Upsampling uses `(step, parent, child)` as the
//! counter triple, so the value drawn for a candidate does not depend on the
//! order in which candidates are evaluated or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator handed to models and resamplers.
pub type StreamRng = ChaCha8Rng;

/// Independent stream families under one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Propose = 1,
    Downsample = 2,
    Resample = 3,
    Importance = 4,
    Repetition = 5,
    Synthetic = 6,
    Audit = 7,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Root of all streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn hash(&self, domain: Domain, a: u64, b: u64, c: u64) -> u64 {
        let mut h = mix64(self.seed.wrapping_add(GOLDEN));
        for word in [domain as u64, a, b, c] {
            h = mix64(h ^ word.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019));
        }
        h
    }

    /// A fresh generator for the counter `(a, b, c)` within `domain`.
    pub fn rng(&self, domain: Domain, a: u64, b: u64, c: u64) -> StreamRng {
        let h = self.hash(domain, a, b, c);
        let mut seed = [0u8; 32];
        for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
            let word = mix64(h.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Seed for a nested run, e.g. repetition `r` of an experiment cell.
    pub fn derive(&self, domain: Domain, a: u64, b: u64, c: u64) -> StreamKey {
        StreamKey::new(self.hash(domain, a, b, c))
    }
}
