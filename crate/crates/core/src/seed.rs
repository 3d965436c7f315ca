//! Seed derivation for repetitions and islands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream owned by an optimizer state. ChaCha8 gives the same
/// sequence on every platform.
pub type RandomStream = ChaCha8Rng;

pub fn stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two words into a well-mixed seed. Not symmetric in its
/// arguments.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Master seed of repetition `rep`.
pub fn repetition_seed(master: u64, rep: u64) -> u64 {
    mix(master ^ 0x5245_5045_4154_0000, rep)
}

/// Seed of island `island` within one run.
pub fn island_seed(run_seed: u64, island: u64) -> u64 {
    mix(run_seed ^ 0x4953_4c41_4e44_0000, island)
}
