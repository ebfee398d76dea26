//! Seed derivation.
//!
//! All streams are derived with the SplitMix64 finalizer, so results are
//! reproducible across machines and independent of execution order:
//!
//! ```text
//! splitmix64(x) = z3 where
//!     z0 = x + 0x9E3779B97F4A7C15            (wrapping)
//!     z1 = (z0 ^ (z0 >> 30)) * 0xBF58476D1CE4E5B9
//!     z2 = (z1 ^ (z1 >> 27)) * 0x94D049BB133111EB
//!     z3 =  z2 ^ (z2 >> 31)
//!
//! trial_seed(master, users, trial) =
//!     splitmix64(splitmix64(splitmix64(master) ^ users) ^ trial)
//! ```
//!
//! A trial seed initializes a ChaCha8 stream.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive mix of two words.
pub fn mix_pair(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b)
}

/// Seed of trial `trial_index` at sweep point `user_count`.
pub fn trial_seed(master_seed: u64, user_count: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ user_count) ^ trial_index)
}

/// Seed of an auxiliary stream `stream` hanging off a trial seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    mix_pair(seed, stream)
}
