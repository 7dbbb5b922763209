//! Seed derivation.
//!
//! Every random quantity in the crate is a pure function of a `u64` seed.
//! Sub-seeds (per trial, per tree node, per layer) come from [`derive`], and
//! channel outputs draw each coordinate from its own counter-based
//! SplitMix64 stream ([`LetterStream`]) keyed by `(seed, coordinate index)`. Trials can then be
//! sharded across threads in any order and still reproduce bit-for-bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First SplitMix64 output from state `x`.
#[inline]
pub fn mix(x: u64) -> u64 {
    LetterStream { state: x }.next_u64()
}

/// Derives an independent child seed from `(seed, index)`.
#[inline]
pub fn derive(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index))
}

/// Derives a child seed from a path of indices, e.g. `(layer, node)`.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |acc, &i| derive(acc, i))
}

/// A general-purpose generator for geometry work (sphere sampling, rotations).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-coordinate stream keys for an `n`-letter block.
///
/// The stream for coordinate `i` under seed `s` is SplitMix64 started at
/// `mix(s) ^ mix(i)`; the coordinate half is precomputed so the hot path
/// costs one finalizer per draw.
#[derive(Debug, Clone)]
pub struct CoordinateStreams {
    keys: Vec<u64>,
}

impl CoordinateStreams {
    pub fn new(n: usize) -> Self {
        Self {
            keys: (0..n as u64).map(mix).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Per-coordinate keys; coordinate `i` draws from `LetterStream::new(block_key ^ keys[i])`.
    #[inline]
    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    /// Key shared by all coordinates of one block transmission.
    #[inline]
    pub fn block_key(seed: u64) -> u64 {
        mix(seed)
    }

    #[inline]
    pub fn stream(&self, block_key: u64, coordinate: usize) -> LetterStream {
        LetterStream {
            state: block_key ^ self.keys[coordinate],
        }
    }
}

/// SplitMix64, bit-identical to [`rand_xoshiro::SplitMix64`] seeded with
/// the same state. Kept local so the per-letter construction inlines into
/// the sampling loops.
#[derive(Debug, Clone)]
pub struct LetterStream {
    state: u64,
}

impl LetterStream {
    pub fn new(state: u64) -> Self {
        Self { state }
    }
}

impl RngCore for LetterStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dest);
    }
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
