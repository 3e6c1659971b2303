//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a SplitMix64 hash of `(master, tag, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Derives a child seed from a parent seed, a purpose tag and an index.
pub fn derive(master: u64, tag: &str, index: u64) -> u64 {
    splitmix(splitmix(master ^ tag_hash(tag)) ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, tag: &str, index: u64) -> Rng {
    rng(derive(master, tag, index))
}
