//! Seedable, splittable random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by `seed` and positioned on the
//! 64-bit ChaCha stream selected by `stream_id`. Streams that differ only in
//! `stream_id` never overlap, so replicates can be run in parallel and still
//! reproduce bit-for-bit.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// 2^-53, the spacing of doubles in [0.5, 1).
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// Stream for lane `lane` of replicate `replicate`. Up to 16 lanes per replicate.
    pub fn for_replicate(seed: u64, replicate: u64, lane: u64) -> Self {
        debug_assert!(lane < 16);
        Self::new(seed, replicate.wrapping_mul(16).wrapping_add(lane))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn open_uniform(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }
}
