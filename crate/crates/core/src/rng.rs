//! Deterministic uniform streams for sampling and replication seeding.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifier of the uniform generator, recorded in run metadata.
pub const GENERATOR_ID: &str = "rand_chacha::ChaCha20Rng(seed_from_u64), uniforms on (0,1) via rand::distr::Open01";
/// Identifier of the replication seed mixer, recorded in run metadata.
pub const SEED_MIX_ID: &str = "master_seed XOR splitmix64(r)";

pub type UniformRng = ChaCha20Rng;

pub fn uniform_rng(seed: u64) -> UniformRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval (0, 1).
pub fn open_uniform(rng: &mut UniformRng) -> f64 {
    rng.sample(Open01)
}

/// splitmix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `r` of a run keyed by `master_seed`.
pub fn replication_seed(master_seed: u64, r: u64) -> u64 {
    master_seed ^ splitmix64(r)
}
