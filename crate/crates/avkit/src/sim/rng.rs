//! Counter-based reproducible random streams.
//!
//! Each (seed, stream, counter) triple derives an independent ChaCha stream,
//! so parallel evaluation order cannot change what any consumer draws and
//! adding a sensor never perturbs another sensor's stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; full-avalanche mixing of one 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix(seed ^ mix(label))
}

/// An RNG keyed by (seed, stream id, counter). Identical keys give identical
/// draws regardless of what happened on any other key.
pub fn stream(seed: u64, stream_id: u64, counter: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&mix(seed).to_le_bytes());
    key[8..16].copy_from_slice(&mix(stream_id ^ 0xa076_1d64_78bd_642f).to_le_bytes());
    key[16..24].copy_from_slice(&mix(counter ^ 0xe703_7ed1_a0b4_28db).to_le_bytes());
    key[24..32].copy_from_slice(&mix(seed ^ stream_id.rotate_left(17) ^ counter.rotate_left(47)).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
