//! Curation toolkit for multimodal training corpora.
//!
//! * [`dedup`]: perceptual hashing, MinHash/LSH near-duplicate search.
//! * [`decontam`]: benchmark-leakage scans and leakage reports.
//! * [`grounding`]: point/box/polygon grounding label grammar.
//! * [`vision_budget`]: native-resolution token budgets and positional indices.
//! * [`pack_balance`]: sequence packing, load balancing and resume cursors.
//! * [`merge`]: weight-space averaging of checkpoints.
//!
//! Numeric code is generic over [`Scalar`] (`f32` / `f64`); the aliases
//! below name the common instantiations.

pub mod binio;
pub mod decontam;
pub mod dedup;
pub mod grounding;
pub mod merge;
pub mod pack_balance;
pub mod rng;
pub mod scalar;
pub mod synth;
pub mod vision_budget;

pub use binio::FormatError;
pub use scalar::Scalar;

pub type LumaMatrixF32 = dedup::LumaMatrix<f32>;
pub type LumaMatrixF64 = dedup::LumaMatrix<f64>;
pub type EmbeddingRecordF32 = decontam::EmbeddingRecord<f32>;
pub type EmbeddingRecordF64 = decontam::EmbeddingRecord<f64>;
pub type PixelGeometryF64 = grounding::PixelGeometry<f64>;
pub type PosEmbedGridF32 = vision_budget::PosEmbedGrid<f32>;
pub type PosEmbedGridF64 = vision_budget::PosEmbedGrid<f64>;
pub type WorkItemF64 = pack_balance::WorkItem<f64>;
pub type GroupAssignmentF64 = pack_balance::GroupAssignment<f64>;
pub type ParamMapF32 = merge::ParamMap<f32>;
pub type ParamMapF64 = merge::ParamMap<f64>;
