//! Near-duplicate detection: perceptual hash, MinHash over the set of hash
//! ones, banded LSH for candidate generation, exact Jaccard verification.

mod lsh;
mod minhash;
mod phash;

use thiserror::Error;

pub use lsh::{
    build_lsh_index, query_candidates, DuplicateVerdict, LshConfig, LshIndex, DEFAULT_BANDS,
    DEFAULT_ROWS_PER_BAND, INDEX_MAGIC,
};
pub use minhash::{
    duplicate_threshold, is_duplicate, jaccard, minhash_signature, ones_positions, Jaccard,
    MinHashSignature, OnesSet, Permutations, NUM_PERM, SENTINEL, UNIVERSE,
};
pub use phash::{
    compute_phash, hash_resampled, low_frequency_dct, resample_for_hash, LumaMatrix, PHash64,
    BLOCK_SIDE, RESAMPLE_SIDE,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DedupError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
}
