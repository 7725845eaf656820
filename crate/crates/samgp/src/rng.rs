//! Seeded stream derivation.
//!
//! Every randomized step of a run owns a substream derived from the master
//! seed plus a fixed tag path (e.g. `(OFFSPRING, generation, index)`), so
//! serial and parallel schedules draw identical values.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are part of the determinism contract: changing them
/// changes every derived stream.
pub mod tag {
    pub const INIT: u64 = 1;
    pub const SAM_NOISE: u64 = 2;
    pub const SHARPNESS: u64 = 3;
    pub const OFFSPRING: u64 = 4;
    pub const DATA: u64 = 5;
    pub const SPLIT: u64 = 6;
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with a tag path into a new 64-bit seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &t in tags {
        h = splitmix64(h ^ t);
    }
    h
}

/// RNG for the substream identified by `tags` under `master`.
pub fn derive_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}

/// FNV-1a over a label, for folding string identifiers (algorithm label,
/// problem name) into seeds. Stable across platforms, unlike `DefaultHasher`.
pub fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
