//! Seeded random streams.
//!
//! Every consumer draws from ChaCha20 keyed by the master seed, with a
//! distinct stream id per purpose, so results never depend on the order in
//! which independent consumers run.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream ids for the different consumers of randomness.
pub mod purpose {
    pub const SKETCH: u64 = 0x5345_4b54;
    pub const ITER_INIT: u64 = 0x4954_4552;
    pub const RANDOM_DESIGNS: u64 = 0x5244_5347;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const LOWRANK: u64 = 0x4c52_4e4b;
}

pub fn stream(seed: u64, purpose: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_independent_of_each_other() {
        let a = stream(7, purpose::SKETCH).next_u64();
        let b = stream(7, purpose::NOISE).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, stream(7, purpose::SKETCH).next_u64());
    }
}
