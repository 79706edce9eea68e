//! Deterministic seed derivation.
//!
//! All randomized operations take an explicit `u64` seed and derive
//! per-stream sub-seeds from it, so restarts, trials and codebook levels are
//! independent yet reproducible regardless of evaluation order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; good avalanche, stable across platforms.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a stream label.
pub fn derive(base: u64, stream: &[u64]) -> u64 {
    let mut state = mix(base ^ 0x6a09_e667_f3bc_c908);
    for &s in stream {
        state = mix(state ^ s);
    }
    state
}

/// Stream-seeded generator.
pub fn rng_from(base: u64, stream: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive(base, stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_stable_and_stream_sensitive() {
        assert_eq!(derive(7, &[1, 2]), derive(7, &[1, 2]));
        assert_ne!(derive(7, &[1, 2]), derive(7, &[2, 1]));
        assert_ne!(derive(7, &[1]), derive(8, &[1]));
    }
}
