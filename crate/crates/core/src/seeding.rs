//! Deterministic derivation of independent RNG streams from one seed.
//!
//! Replicates, simulations and benchmark repetitions each get a generator
//! keyed by `(seed, stream, index)`, so parallel units draw from disjoint
//! streams and results never depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses `(seed, stream, index)` into a fresh 64-bit seed.
#[must_use]
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut state = seed;
    let _ = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xA076_1D64_78BD_642F);
    let _ = splitmix64(&mut state);
    state ^= index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    splitmix64(&mut state)
}

/// A ChaCha stream that depends only on `(seed, stream, index)`.
#[must_use]
pub fn derive_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut words = [0u64; 4];
    words[0] = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xA076_1D64_78BD_642F);
    words[1] = splitmix64(&mut state);
    state ^= index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    words[2] = splitmix64(&mut state);
    words[3] = splitmix64(&mut state);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_rng_is_deterministic() {
        let mut first = derive_rng(7, 1, 3);
        let mut second = derive_rng(7, 1, 3);
        let a: Vec<u64> = (0..8).map(|_| first.random()).collect();
        let b: Vec<u64> = (0..8).map(|_| second.random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ_by_any_component() {
        let base: u64 = derive_rng(7, 1, 3).random();
        assert_ne!(base, derive_rng(8, 1, 3).random());
        assert_ne!(base, derive_rng(7, 2, 3).random());
        assert_ne!(base, derive_rng(7, 1, 4).random());
    }

    #[test]
    fn derived_seeds_differ_by_index() {
        let seeds: Vec<u64> = (0..100).map(|i| derive_seed(42, 5, i)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
    }
}
