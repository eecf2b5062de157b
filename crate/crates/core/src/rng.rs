//! Deterministic random streams keyed by `(seed, stream ids)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for the stream `ids` under `seed`; the result does
/// not depend on which thread asks for it.
pub fn stream_rng(seed: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut key = splitmix(seed);
    for &id in ids {
        key = splitmix(key ^ splitmix(id.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    ChaCha8Rng::seed_from_u64(key)
}
