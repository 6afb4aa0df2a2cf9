//! Seeded randomness. ChaCha is used everywhere so that a (seed, config, data)
//! triple fully determines training and generation, independent of platform
//! and thread count.

use rand::SeedableRng;

pub type Prng = rand_chacha::ChaCha12Rng;

pub fn seeded(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Mix a base seed with two counters (splitmix64 finalizer). Used to give every
/// training example its own dropout stream, so batch parallelism cannot change
/// which mask an example sees.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(b.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
