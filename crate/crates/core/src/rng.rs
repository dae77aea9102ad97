//! Random streams used by sampling and the bootstrap.
//!
//! Every stream is a xoshiro256** generator. A 64-bit seed is expanded into the
//! 256-bit state with four consecutive SplitMix64 outputs (the expansion the
//! xoshiro authors recommend). Independent sub-streams (one per simulated row,
//! one per bootstrap replicate) are keyed by [`mix`], so work split across
//! threads reproduces the serial result exactly.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index`: the `index + 1`-th output of SplitMix64 started at `master`.
pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64_finalize(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone)]
pub struct Stream(Xoshiro256StarStar);

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut bytes = [0u8; 32];
        for (k, chunk) in bytes.chunks_exact_mut(8).enumerate() {
            chunk.copy_from_slice(&mix(seed, k as u64).to_le_bytes());
        }
        Stream(Xoshiro256StarStar::from_seed(bytes))
    }

    /// Sub-stream `index` of `master`.
    pub fn substream(master: u64, index: u64) -> Self {
        Self::new(mix(master, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..n` by widening multiply.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
