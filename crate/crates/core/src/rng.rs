//! Seed derivation.
//!
//! A master 64-bit seed is split into independent streams with the
//! SplitMix64 finalizer applied to `master ^ mix(tag) ^ mix(index)`. Every
//! stream is a ChaCha8 generator seeded from the mixed value, so a stream is
//! a pure function of `(master, tag, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags keep the per-site clocks, replica seeds and auxiliary draws
/// of one master seed apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    SiteClock = 1,
    Replica = 2,
    Init = 3,
    Aux = 4,
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    mix64(master ^ mix64(stream as u64) ^ mix64(index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

pub fn stream_rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}

/// Seed of replica `r` under a master seed.
pub fn replica_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, Stream::Replica, r as u64)
}
