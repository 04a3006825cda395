//! Seeded, platform-stable randomness and hashing primitives.
//!
//! Everything here must produce identical output on every platform for a
//! given seed: signatures, bucket keys and shuffles are persisted or replayed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ChaCha8 stream for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// In-place Fisher-Yates shuffle drawing `next_u64() % (i + 1)` for
/// `i = n-1 .. 1`. Spelled out rather than delegated so the permutation for a
/// seed never changes with the `rand` version.
pub fn shuffle<T, R: RngCore>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Stable shard assignment for a string key.
pub fn shard_of(key: &str, shard_count: u64) -> u64 {
    assert!(shard_count > 0, "shard_count must be positive");
    fnv1a64(key.as_bytes()) % shard_count
}
