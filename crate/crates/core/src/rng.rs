//! The single random source used throughout the pipeline.
//!
//! All randomness comes from xoshiro256++ seeded through SplitMix64 (the
//! reference `seed_from_u64` expansion). Independent streams are derived by
//! applying the generator's 2^128-step `jump` once per stream index, so the
//! same `(seed, stream)` pair yields the same sequence in any implementation
//! of xoshiro256++.
//!
//! Bounded integers are drawn with Lemire's multiply-and-reject method on the
//! full 64-bit output, which is exact (unbiased) and platform independent.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct RainRng {
    inner: Xoshiro256PlusPlus,
}

impl RainRng {
    pub fn new(seed: u64) -> Self {
        RainRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Stream `k` of `seed`: the base generator advanced by `k` jumps.
    pub fn stream(seed: u64, k: u64) -> Self {
        let mut rng = Self::new(seed);
        for _ in 0..k {
            rng.inner.jump();
        }
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw from an empty range");
        let n = n as u64;
        let mut m = (self.next_u64() as u128) * (n as u128);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = (self.next_u64() as u128) * (n as u128);
            }
        }
        (m >> 64) as usize
    }

    /// Uniform value in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
