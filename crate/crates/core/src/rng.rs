//! Counter-based seed derivation.
//!
//! Every random stream is identified by `(master_seed, replication, stream)` and
//! seeded with a SplitMix64-style hash of that triple. Workers never share a
//! generator, so results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every simulation stream.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `hash(master_seed, replication, stream)`.
pub fn derive_seed(master_seed: u64, replication: u64, stream: u64) -> u64 {
    let a = mix(master_seed.wrapping_add(GOLDEN));
    let b = mix(a ^ replication.wrapping_mul(GOLDEN).wrapping_add(0x632b_e59b_d9b4_e019));
    mix(b ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(GOLDEN))
}

/// Generator for stream `stream` of replication `replication`.
pub fn stream_rng(master_seed: u64, replication: u64, stream: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master_seed, replication, stream))
}
