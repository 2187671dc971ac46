//! Named random streams derived from one master seed.
//!
//! Each stream is a ChaCha8 generator keyed by a hash of the master seed, a
//! stream tag, and up to two indices, so that e.g. the initial points depend on
//! the seed alone and are identical across sharing schemes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    InitPoints,
    GpRestarts { geometry: usize, iteration: u32 },
    Acquisition { geometry: usize, iteration: u32 },
    /// One Pauli word measured at one point; `word` is any injective key of the word.
    Shots { point: u64, word: (u64, u64) },
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    fn key(self) -> [u64; 4] {
        match self {
            Stream::InitPoints => [1, 0, 0, 0],
            Stream::GpRestarts { geometry, iteration } => [2, geometry as u64, iteration as u64, 0],
            Stream::Acquisition { geometry, iteration } => [3, geometry as u64, iteration as u64, 0],
            Stream::Shots { point, word } => [4, point, word.0, word.1],
        }
    }
}

/// Generator for `stream` under `seed`.
pub fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut h = mix(seed);
    for k in s.key() {
        h = mix(h ^ k);
    }
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(h ^ i as u64).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
