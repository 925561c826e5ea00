//! Deterministic random streams derived from `(seed, label, counter)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every stochastic routine in the crate.
pub type StreamRng = ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit mix of a seed and a sequence of words.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream for repetition `counter` of component `label`.
pub fn stream(seed: u64, label: &str, counter: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix(seed, &[label_hash(label), counter]))
}

/// Stream keyed by several counters, e.g. `(step, edge)`.
pub fn stream_multi(seed: u64, label: &str, counters: &[u64]) -> StreamRng {
    let mut words = vec![label_hash(label)];
    words.extend_from_slice(counters);
    StreamRng::seed_from_u64(mix(seed, &words))
}
