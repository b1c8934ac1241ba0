//! Deterministic seed derivation for parallel Monte Carlo work.
//!
//! Every trial draws its randomness from a ChaCha stream seeded by a
//! splitmix-style hash of (master seed, derivation path).  The path encodes
//! the sweep point, the trial index and the draw purpose, so results are
//! independent of worker count and of the order in which trials execute.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED_SALT: u64 = 0x6a09_e667_f3bc_c909;
const WORD_SALT: u64 = 0xbb67_ae85_84ca_a73b;

/// splitmix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses `(master, path)` into one 64-bit seed.  Different paths give
/// independent streams for the same master seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = mix(master ^ SEED_SALT);
    for &word in path {
        state = mix(state ^ mix(word ^ WORD_SALT));
    }
    state
}

/// ChaCha8 generator for one derivation path.
pub fn trial_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
