//! Seed hierarchy: master -> generation -> individual -> run.
//!
//! Child seeds depend only on the parent seed and the child index, so any
//! subtree can be recomputed without replaying its siblings and the work can
//! be spread over threads in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ mix64(index.wrapping_add(1)))
}

/// Seed for a named stream hanging off `parent` (e.g. the GA's own stream).
pub fn derive_named(parent: u64, name: &str) -> u64 {
    name.bytes()
        .fold(parent ^ 0xcbf2_9ce4_8422_2325, |acc, b| derive_seed(acc, b as u64))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for parent in 0..50u64 {
            for i in 0..50u64 {
                assert!(seen.insert(derive_seed(parent, i)));
            }
        }
        assert_ne!(derive_named(7, "ga"), derive_named(7, "eval"));
    }
}
