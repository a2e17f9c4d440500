//! Counter-based hashing used for every random draw in the crate.
//!
//! A draw is a pure function of `(seed, index)`, so any edge or vertex of a
//! sample can be queried in O(1) without replaying a stream, and parallel
//! workers produce the same bits regardless of scheduling.

/// Odd constant derived from the golden ratio; scrambles the counter before mixing.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `seed ^ (index * GOLDEN_GAMMA)`.
#[inline]
pub fn mix64(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential view over `mix64(seed, 0), mix64(seed, 1), ...`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.seed, self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform value in `[0, bound)` by multiply-shift. `bound` must be nonzero.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform value in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
