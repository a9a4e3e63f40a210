//! Stable per-unit seed derivation.
//!
//! Every independently generated unit (a table of some relation, a negative
//! table, the header choices of one table) gets its own generator seeded from
//! `(master_seed, label, ordinal)`:
//!
//! ```text
//! h = FNV-1a-64 over  master_seed (8 bytes LE) || label (UTF-8) || 0xFF || ordinal (8 bytes LE)
//! seed = splitmix64(h)
//! ```
//!
//! The 0xFF separator cannot occur in UTF-8, so distinct `(label, ordinal)`
//! pairs never share a byte string. Generators are ChaCha8 seeded with
//! `seed_from_u64(seed)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, label: &str, ordinal: u64) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master_seed.to_le_bytes());
    h = fnv1a(h, label.as_bytes());
    h = fnv1a(h, &[0xff]);
    h = fnv1a(h, &ordinal.to_le_bytes());
    splitmix64(h)
}

pub fn rng_for(master_seed: u64, label: &str, ordinal: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master_seed, label, ordinal))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
