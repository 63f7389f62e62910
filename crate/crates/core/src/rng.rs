//! Seeded random number generation.
//!
//! Every sampling routine takes an explicit `u64` seed and draws from a
//! ChaCha20 stream, whose keystream has published reference vectors, so
//! generated data is identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type LabRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha20Rng::seed_from_u64(seed)
}
