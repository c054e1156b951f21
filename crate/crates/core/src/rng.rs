//! The portable seeded generator behind every stochastic operator.
//!
//! The core is PCG32 (64-bit LCG state, XSH-RR output) on the reference
//! default stream:
//!
//! ```text
//! inc    = (0xa02bdbf7bb3c0a7 << 1) | 1        = 1442695040888963407
//! state0 = (seed + inc) * 6364136223846793005 + inc          (mod 2^64)
//! next_u32:
//!     old   = state
//!     state = old * 6364136223846793005 + inc                (mod 2^64)
//!     xsh   = (((old >> 18) ^ old) >> 27) as u32
//!     out   = xsh.rotate_right((old >> 59) as u32)
//! next_u64 = next_u32 | (next_u32 << 32)       (low word drawn first)
//! ```
//!
//! Derived draws are defined here so they can be reproduced outside Rust:
//! `unit() = (next_u64 >> 11) * 2^-53` and `below(n) = (next_u64 * n) >> 64`
//! computed in 128-bit arithmetic.

use rand_core::Rng;
use rand_pcg::Pcg32;

use crate::image::Image;

const DEFAULT_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

#[derive(Debug, Clone)]
pub struct SeededRng(Pcg32);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(Pcg32::new(seed, DEFAULT_STREAM))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Integer in `0..n` by multiply-shift. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// The first `k` entries of a seeded Fisher-Yates shuffle of `0..n`,
    /// i.e. `k` distinct indices drawn without replacement.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct values from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// A uniformly random image; handy for tests and demos.
pub fn random_image(width: u32, height: u32, seed: u64) -> Image {
    let mut rng = SeededRng::new(seed);
    Image::from_fn(width, height, |_, _| {
        let v = rng.next_u32();
        [v as u8, (v >> 8) as u8, (v >> 16) as u8]
    })
}
