pub mod budget;
pub mod dedup;
pub mod embed;
pub mod grounding;
pub mod hash;
pub mod merge;
pub mod pack;
