use super::plan::{ImagePlan, VideoPlan};
use super::BudgetError;

/// Temporal position of each timestamp: `round(ts / tick)`, halves rounded up.
pub fn temporal_positions(timestamps: &[f64], tick: f64) -> Result<Vec<u64>, BudgetError> {
    if !(tick.is_finite() && tick > 0.0) {
        return Err(BudgetError::Timestamps(format!("tick must be finite and > 0, got {tick}")));
    }
    let mut prev = f64::NEG_INFINITY;
    timestamps
        .iter()
        .enumerate()
        .map(|(i, &ts)| {
            if !(ts.is_finite() && ts >= 0.0) {
                return Err(BudgetError::Timestamps(format!("timestamp {i} is {ts}")));
            }
            if ts < prev {
                return Err(BudgetError::Timestamps(format!(
                    "timestamp {i} ({ts}) precedes timestamp {} ({prev})",
                    i - 1
                )));
            }
            prev = ts;
            Ok((ts / tick).round() as u64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub enum Segment<'a> {
    Text(usize),
    Image(&'a ImagePlan),
    Video(&'a VideoPlan),
}

/// `(t, h, w)` rotary position of every token in a multimodal sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RopeIndex3D {
    pub positions: Vec<[u64; 3]>,
}

impl RopeIndex3D {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Position the next text token would take.
    pub fn next_position(&self) -> u64 {
        self.positions
            .iter()
            .map(|p| p[0].max(p[1]).max(p[2]) + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Lays out 3D rotary indices.
///
/// Text tokens advance one scalar position shared by all three axes. A vision
/// block starting at position `s` gives the token in grid cell `(i, j)` of
/// frame `f` the index `(s + time_index[f], s + i, s + j)`; an image is a
/// single frame with time index 0. Text after a block resumes at one past the
/// largest index used so far.
pub fn build_mrope_indices(segments: &[Segment<'_>]) -> RopeIndex3D {
    let mut positions = Vec::new();
    let mut next = 0u64;
    let push_frame = |positions: &mut Vec<[u64; 3]>, start: u64, t: u64, gh: u64, gw: u64| {
        for i in 0..gh {
            for j in 0..gw {
                positions.push([start + t, start + i, start + j]);
            }
        }
    };
    for seg in segments {
        match *seg {
            Segment::Text(len) => {
                for _ in 0..len {
                    positions.push([next; 3]);
                    next += 1;
                }
            }
            Segment::Image(plan) => {
                push_frame(&mut positions, next, 0, plan.grid_h, plan.grid_w);
                next += plan.grid_h.max(plan.grid_w);
            }
            Segment::Video(plan) => {
                let (gh, gw) = plan.frame_grid();
                for &t in &plan.time_indices {
                    push_frame(&mut positions, next, t, gh, gw);
                }
                let last_t = plan.time_indices.last().copied().unwrap_or(0);
                next += (last_t + 1).max(gh).max(gw);
            }
        }
    }
    RopeIndex3D { positions }
}
