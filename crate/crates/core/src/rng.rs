//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose seed is derived
//! from a master seed, a purpose tag and an index. Changing one purpose (for
//! example the number of probe points) never perturbs another stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for substream derivation.
pub mod tags {
    pub const MIXTURE: &str = "mixture";
    pub const SAMPLE: &str = "sample";
    pub const PROBE: &str = "probe";
    pub const MONTE_CARLO: &str = "monte-carlo";
    pub const POWER_LAW: &str = "power-law";
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of substream `(seed, tag, index)`.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    // FNV-1a over the tag bytes
    let tag_hash = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    });
    splitmix64(splitmix64(splitmix64(seed) ^ tag_hash) ^ index)
}

/// Generator for the substream `(seed, tag, index)`.
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}
