//! Seed derivation and counter-based draws.
//!
//! Per-cell randomness (label smoothing draws, uncertainty injection) is not
//! taken from a sequential stream. Each cell hashes `(seed, stream, row, col)`
//! through the SplitMix64 finalizer, so a cell's draw depends only on its
//! coordinates and never on iteration order. Sequential sampling (synthetic
//! rows, weight init, batch shuffles) uses ChaCha8 seeded from [`derive`].
//! Both algorithms are fixed; changing either changes every artifact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of words into one well-mixed seed.
pub fn derive(seed: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(seed), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Uniform draw in `[0, 1)` keyed by cell coordinates.
pub fn cell_uniform(seed: u64, stream: u64, row: usize, col: usize) -> f64 {
    let bits = derive(seed, &[stream, row as u64, col as u64]);
    // top 53 bits -> exactly representable dyadic rational in [0, 1)
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn chacha(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, words))
}

/// Stream tags, so that independent consumers of one seed never collide.
pub(crate) mod stream {
    pub const LSR: u64 = 0x004C_5352;
    pub const UNCERTAINTY: u64 = 0x0055_4E43;
    pub const SYNTH_WEIGHTS: u64 = 0x5357_4754;
    pub const SYNTH_ROWS: u64 = 0x5352_4F57;
    pub const INIT: u64 = 0x494E_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const MEMBER: u64 = 0x4D45_4D42;
    pub const READERS: u64 = 0x5245_4144;
}
