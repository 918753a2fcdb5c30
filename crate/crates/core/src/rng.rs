//! Deterministic random streams derived from one experiment seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for `(seed, stream)`; equal inputs give equal draws.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids used across the crate, kept apart so that adding draws in one
/// place never shifts another.
pub mod streams {
    pub const WORLD: u64 = 1;
    pub const GT_CLOUD: u64 = 2;
    pub const TRAINING: u64 = 3;
    /// Candidate pools use `CANDIDATES + round`.
    pub const CANDIDATES: u64 = 1_000;
}

/// SplitMix64 finalizer; derives per-round seeds from an experiment seed.
pub fn derive(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
