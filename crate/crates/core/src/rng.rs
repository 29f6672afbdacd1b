//! Portable, seedable random stream.
//!
//! Every random draw in the crate goes through [`Stream`] so that results can be
//! reproduced bit-for-bit by another implementation given the same seed:
//!
//! * core generator: xoshiro256++ seeded from a `u64` through SplitMix64
//!   (the reference seeding procedure of the xoshiro authors);
//! * `uniform()`: `(next_u64 >> 11) * 2^-53`, a double in `[0, 1)`;
//! * `uniform_in(a, b)`: `a + (b - a) * uniform()`;
//! * `index_below(n)`: `floor(uniform() * n)`;
//! * `standard_normal()`: Box-Muller cosine branch on two fresh uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`; the sine branch is discarded;
//! * derived streams: [`derive_seed`] mixes a master seed with a stream index.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct Stream {
    inner: Xoshiro256PlusPlus,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Integer in `0..n`. `n` must be positive.
    #[inline]
    pub fn index_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.uniform() * n as f64) as usize;
        i.min(n - 1)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// Seed for sub-stream `index` of `master`: the first SplitMix64 output after
/// seeding with `master ^ (index * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    sm.next_u64()
}
