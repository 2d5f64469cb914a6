//! Seed derivation and the RNG type used throughout the crate.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed derived from a
//! master seed and a tuple of coordinates, so a run's randomness depends only
//! on where it sits in the grid and never on execution order.

use rand::SeedableRng;

pub type Rng = rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a coordinate path.
pub fn derive(master: u64, coords: &[u64]) -> u64 {
    let mut h = mix(master.wrapping_add(GOLDEN));
    for &c in coords {
        h = mix(h ^ mix(c.wrapping_add(GOLDEN)));
    }
    h
}

/// Stable 64-bit hash of a label, for use as a seed coordinate.
pub fn label(s: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn stream(master: u64, coords: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(master, coords))
}
