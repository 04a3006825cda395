//! Native-resolution vision token arithmetic and positional indices.
//!
//! Token counts are post-merge: a `patch x merge` pixel cell (28 px by
//! default) becomes one token the language decoder sees.

mod interp;
mod plan;
mod positions;
mod rope;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use interp::{interpolate_pos_embed, PosEmbedGrid};
pub use plan::{fit_grid, plan_image, plan_video, ImagePlan, VideoPlan};
pub use positions::{build_mrope_indices, temporal_positions, RopeIndex3D, Segment};
pub use rope::{rope2d_rotate, DEFAULT_ROPE_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    /// ViT patch side in pixels.
    pub patch: u32,
    /// Spatial merge factor of the projector.
    pub merge: u32,
    pub image_cap: u64,
    pub frame_min: u64,
    pub frame_max: u64,
    pub video_cap: u64,
    /// Seconds of video per temporal position step.
    pub tick: f64,
    /// Frame sampling rate before budgeting.
    pub base_fps: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            patch: 14,
            merge: 2,
            image_cap: 16384,
            frame_min: 128,
            frame_max: 768,
            video_cap: 24576,
            tick: 0.5,
            base_fps: 2.0,
        }
    }
}

impl BudgetConfig {
    /// Pixel side of one post-merge token cell.
    pub fn cell(&self) -> u64 {
        u64::from(self.patch) * u64::from(self.merge)
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        let bad = |m: &str| Err(BudgetError::Config(m.to_string()));
        if self.patch == 0 || self.merge == 0 {
            return bad("patch and merge must be >= 1");
        }
        if self.image_cap == 0 {
            return bad("image_cap must be >= 1");
        }
        if !(1 <= self.frame_min && self.frame_min <= self.frame_max && self.frame_max <= self.video_cap) {
            return bad("need 1 <= frame_min <= frame_max <= video_cap");
        }
        if !(self.tick.is_finite() && self.tick > 0.0) {
            return bad("tick must be finite and > 0");
        }
        if !(self.base_fps.is_finite() && self.base_fps > 0.0) {
            return bad("base_fps must be finite and > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BudgetError {
    #[error("invalid budget config: {0}")]
    Config(String),
    #[error("image dimensions must be >= 1, got {width}x{height}")]
    Dimensions { width: u64, height: u64 },
    #[error("video duration must be finite and > 0, got {0}")]
    Duration(f64),
    #[error("invalid timestamps: {0}")]
    Timestamps(String),
    #[error("rope vector length {0} is not a positive multiple of 4")]
    RopeLength(usize),
    #[error("invalid position embedding grid: {0}")]
    Grid(String),
}
