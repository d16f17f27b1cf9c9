//! Counter-based deterministic random numbers.
//!
//! Every random draw is a pure function of `(seed, stream, counter)`, so any
//! consumer can be replayed bit-for-bit regardless of evaluation order or
//! worker count.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stateless counter RNG keyed by a seed.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Raw 64 random bits for `(stream, counter)`.
    #[inline]
    pub fn bits(&self, stream: u64, counter: u64) -> u64 {
        let z = self
            .seed
            .wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1)))
            .wrapping_add(splitmix(counter.wrapping_add(GOLDEN)));
        splitmix(splitmix(z))
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&self, stream: u64, counter: u64) -> f64 {
        (self.bits(stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller on two uniform substreams).
    pub fn normal(&self, stream: u64, counter: u64) -> f64 {
        let u1 = self.uniform(stream, 2 * counter).max(f64::MIN_POSITIVE);
        let u2 = self.uniform(stream, 2 * counter + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
