//! Seeded uniform source shared by every engine.
//!
//! The generator is ChaCha8 (`rand_chacha`), whose output stream is stable
//! across crate versions. Each draw consumes exactly one 64-bit word and maps
//! its top 53 bits onto the half-open interval `[0, 1)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const INV_2_POW_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic stream of uniforms in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct UniformSource {
    seed: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl UniformSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Independent stream `stream` under the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            rng,
            draws: 0,
        }
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        self.draws += 1;
        (self.rng.next_u64() >> 11) as f64 * INV_2_POW_53
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of uniforms drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_half_open() {
        let mut src = UniformSource::new(7);
        for _ in 0..100_000 {
            let u = src.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
        assert_eq!(src.draws(), 100_000);
    }

    #[test]
    fn equal_seeds_give_equal_streams() {
        let mut a = UniformSource::new(42);
        let mut b = UniformSource::new(42);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_f64().to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = UniformSource::with_stream(42, 0);
        let mut b = UniformSource::with_stream(42, 1);
        let same = (0..64).filter(|_| a.next_f64() == b.next_f64()).count();
        assert!(same < 2);
    }

    #[test]
    fn largest_draw_stays_below_one() {
        let top = ((u64::MAX >> 11) as f64) * INV_2_POW_53;
        assert!(top < 1.0);
    }
}
