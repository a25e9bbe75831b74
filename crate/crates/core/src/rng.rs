use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent seed for sub-stream `stream` of `seed`.
///
/// Work items (segments, folds, trees) take their randomness from
/// `derive_seed(seed, index)` so results do not depend on scheduling.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xA076_1D64_78BD_642F))
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
