//! Portable 64-bit linear congruential generator.
//!
//! `state ← state × 6364136223846793005 + 1442695040888963407 (mod 2^64)`
//! (Knuth's MMIX constants). The seed is mixed once through the same step
//! before the first draw. Uniform doubles take the top 53 bits of the state.
//!
//! Obstacle layouts and synthetic sound loops are derived from this generator
//! so they reproduce exactly across platforms and releases.

pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Self { state: seed };
        rng.next_u64();
        rng
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
