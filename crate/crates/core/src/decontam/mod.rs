//! Benchmark-leakage removal.
//!
//! Three independent filters share this module: the hash scan (train images
//! against an LSH index of benchmark images, whole-sample drop), the dual
//! embedding-similarity scan over precomputed vectors, and a threshold filter
//! on precomputed pair scores. Every comparison is a strict `>`.

mod embed;
mod hash_scan;
mod pair_score;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dedup::DedupError;

pub use embed::{
    read_embeddings_bin, scan_embedding_leakage, write_embeddings_bin, EmbeddingRecord,
    EmbeddingThresholds, ThresholdMode, EMBEDDING_MAGIC, NORM_TOLERANCE,
};
pub use hash_scan::{benchmark_owners, scan_hash_leakage, HashLeakage};
pub use pair_score::{filter_pair_score, PairFilter, DEFAULT_PAIR_THRESHOLD};
pub use report::{emit_report, LeakageReport, LeakageRow, ReportFormat, CSV_HEADER, TOTAL_LABEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Benchmark,
}

/// One line of a sample manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifestEntry {
    pub sample_id: String,
    pub image_ids: Vec<String>,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark_name: Option<String>,
    /// Dataset the training sample came from; the row key of leakage reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

pub const UNKNOWN_SOURCE: &str = "unknown";

impl SampleManifestEntry {
    pub fn train(sample_id: impl Into<String>, source: impl Into<String>, images: &[&str]) -> Self {
        Self {
            sample_id: sample_id.into(),
            image_ids: images.iter().map(|s| s.to_string()).collect(),
            split: Split::Train,
            benchmark_name: None,
            source: Some(source.into()),
        }
    }

    pub fn benchmark(sample_id: impl Into<String>, benchmark: impl Into<String>, images: &[&str]) -> Self {
        Self {
            sample_id: sample_id.into(),
            image_ids: images.iter().map(|s| s.to_string()).collect(),
            split: Split::Benchmark,
            benchmark_name: Some(benchmark.into()),
            source: None,
        }
    }

    pub fn source_or_unknown(&self) -> &str {
        self.source.as_deref().unwrap_or(UNKNOWN_SOURCE)
    }

    pub fn validate(&self) -> Result<(), DecontamError> {
        let bad = |reason: &str| DecontamError::InvalidEntry {
            sample_id: self.sample_id.clone(),
            reason: reason.to_string(),
        };
        if self.image_ids.is_empty() {
            return Err(bad("sample lists no images"));
        }
        match (self.split, &self.benchmark_name) {
            (Split::Benchmark, None) => Err(bad("benchmark sample without benchmark_name")),
            (Split::Train, Some(_)) => Err(bad("train sample must not carry benchmark_name")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DecontamError {
    #[error("sample {sample_id:?}: {reason}")]
    InvalidEntry { sample_id: String, reason: String },
    #[error("sample {sample_id:?} references image {image_id:?} which has no hash")]
    MissingHash { sample_id: String, image_id: String },
    #[error("benchmark image {0:?} has no benchmark attribution")]
    MissingAttribution(String),
    #[error("benchmark image {image_id:?} attributed to both {first:?} and {second:?}")]
    ConflictingAttribution {
        image_id: String,
        first: String,
        second: String,
    },
    #[error("embedding {id:?}: {reason}")]
    Embedding { id: String, reason: String },
    #[error("pair score for {id:?} is not finite")]
    NonFiniteScore { id: String },
    #[error(transparent)]
    Dedup(#[from] DedupError),
}
