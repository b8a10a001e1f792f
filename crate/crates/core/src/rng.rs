//! Seeding conventions.
//!
//! Every random stream is a `ChaCha8Rng` (portable, pinned by `rand_chacha`).
//! Repeat `i` of an experiment with master seed `s` uses the seed
//! `repeat_seed(s, i)`, a SplitMix64 finalizer applied to `s ⊕ (i+1)·φ`
//! with `φ = 0x9E3779B97F4A7C15`. Within a run, stream 0 drives rounding and
//! the policies' own randomness, stream 1 drives function sampling.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn repeat_seed(master: u64, repeat: u64) -> u64 {
    mix64(master ^ repeat.wrapping_add(1).wrapping_mul(GOLDEN))
}

pub fn from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Generator on a given stream of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut r = Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
