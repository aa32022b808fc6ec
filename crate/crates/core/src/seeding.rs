//! Seed derivation for independent random roles.
//!
//! Every randomized component (stream order, algorithm coins, instance
//! sampling) draws from its own ChaCha stream. Seeds for those streams are
//! derived from a master seed, a role tag and an index, so that trial `i` of
//! an experiment is reproducible in isolation and independent of how trials
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The PRNG used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Randomness roles. Each role gets a disjoint seed stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    StreamOrder,
    AlgorithmCoins,
    Instance,
    Hash,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::StreamOrder => 0x5354_524d,
            Role::AlgorithmCoins => 0x414c_474f,
            Role::Instance => 0x494e_5354,
            Role::Hash => 0x4841_5348,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed for `(role, index)` under `master`.
pub fn derive_seed(master: u64, role: Role, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ role.tag()) ^ index)
}

/// A PRNG seeded directly from `seed`.
pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A PRNG for `(role, index)` under `master`.
pub fn derived_rng(master: u64, role: Role, index: u64) -> Rng {
    rng_from_seed(derive_seed(master, role, index))
}
