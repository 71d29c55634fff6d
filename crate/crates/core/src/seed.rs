//! Seed derivation. Every random stream in the crate is a ChaCha20 generator
//! keyed by a 64-bit seed; sub-streams are derived by hashing a parent seed
//! with a stream tag and an index, so stream `i` never depends on how many
//! other streams were drawn or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Stream tags. Distinct constants keep sibling streams independent.
pub mod tag {
    pub const TRIAL: u64 = 0x7472_6961_6c00_0001;
    pub const SPARSITY: u64 = 0x7370_6172_7300_0002;
    pub const TOPOLOGY_RETRY: u64 = 0x746f_706f_0000_0003;
    pub const PAIR_SAMPLE: u64 = 0x7061_6972_0000_0004;
    pub const WEIGHT: u64 = 0x7765_6967_6874_0005;
    pub const TOPOLOGY: u64 = 0x746f_706f_6c00_0006;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(parent) ^ stream) ^ index)
}

pub fn rng(seed: u64) -> StreamRng {
    ChaCha20Rng::seed_from_u64(seed)
}
