use serde_json::{json, Value};

use super::positions::temporal_positions;
use super::{BudgetConfig, BudgetError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePlan {
    pub out_width: u64,
    pub out_height: u64,
    pub grid_h: u64,
    pub grid_w: u64,
    pub tokens: u64,
}

impl ImagePlan {
    fn from_grid((grid_h, grid_w): (u64, u64), cell: u64) -> Self {
        Self {
            out_width: grid_w * cell,
            out_height: grid_h * cell,
            grid_h,
            grid_w,
            tokens: grid_h * grid_w,
        }
    }

    /// `{"out_w", "out_h", "grid": [h, w], "tokens"}`.
    pub fn to_json(&self) -> Value {
        json!({
            "out_w": self.out_width,
            "out_h": self.out_height,
            "grid": [self.grid_h, self.grid_w],
            "tokens": self.tokens,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoPlan {
    /// Geometry of every kept frame.
    pub frame: ImagePlan,
    pub timestamps: Vec<f64>,
    pub per_frame_tokens: u64,
    pub effective_fps: f64,
    pub time_indices: Vec<u64>,
}

impl VideoPlan {
    pub fn frames(&self) -> usize {
        self.timestamps.len()
    }

    pub fn frame_grid(&self) -> (u64, u64) {
        (self.frame.grid_h, self.frame.grid_w)
    }

    pub fn total_tokens(&self) -> u64 {
        self.frames() as u64 * self.per_frame_tokens
    }

    /// Per-frame image fields (with `tokens` as the video total) plus
    /// `timestamps`, `time_indices`, `per_frame_tokens`, `effective_fps`.
    pub fn to_json(&self) -> Value {
        json!({
            "out_w": self.frame.out_width,
            "out_h": self.frame.out_height,
            "grid": [self.frame.grid_h, self.frame.grid_w],
            "tokens": self.total_tokens(),
            "timestamps": self.timestamps,
            "time_indices": self.time_indices,
            "per_frame_tokens": self.per_frame_tokens,
            "effective_fps": self.effective_fps,
        })
    }
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn grid_at(height: f64, width: f64, cell: f64, scale: f64) -> (u64, u64) {
    let side = |v: f64| round_half_up(v * scale / cell).max(1.0) as u64;
    (side(height), side(width))
}

fn product((h, w): (u64, u64)) -> u64 {
    h.saturating_mul(w)
}

const BISECT_STEPS: usize = 80;

/// Token grid `(rows, cols)` for a `height x width` picture with
/// `lo <= rows * cols <= hi`.
///
/// The native grid rounds each side to the nearest multiple of `cell`
/// (at least one cell). If that is outside the window the picture is scaled
/// uniformly: down to the largest scale whose rounded grid fits under `hi`,
/// or up to the smallest scale whose rounded grid reaches `lo`. Pathological
/// aspect ratios where rounding jumps over the whole window fall back to the
/// in-window grid closest to the original aspect ratio.
pub fn fit_grid(height: f64, width: f64, cell: u64, lo: u64, hi: u64) -> (u64, u64) {
    assert!(1 <= lo && lo <= hi, "invalid token window [{lo}, {hi}]");
    let cell = cell as f64;
    let native = grid_at(height, width, cell, 1.0);
    let n = product(native);
    let grid = if n > hi {
        // grid_at(0) = (1, 1) always fits
        let (mut ok, mut bad) = (0.0f64, 1.0f64);
        for _ in 0..BISECT_STEPS {
            let mid = 0.5 * (ok + bad);
            if product(grid_at(height, width, cell, mid)) <= hi {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        grid_at(height, width, cell, ok)
    } else if n < lo {
        let (mut short, mut reach) = (1.0f64, 2.0f64);
        while product(grid_at(height, width, cell, reach)) < lo {
            short = reach;
            reach *= 2.0;
        }
        for _ in 0..BISECT_STEPS {
            let mid = 0.5 * (short + reach);
            if product(grid_at(height, width, cell, mid)) >= lo {
                reach = mid;
            } else {
                short = mid;
            }
        }
        grid_at(height, width, cell, reach)
    } else {
        native
    };
    if (lo..=hi).contains(&product(grid)) {
        grid
    } else {
        closest_aspect_grid(height / width, lo, hi)
    }
}

fn closest_aspect_grid(aspect_hw: f64, lo: u64, hi: u64) -> (u64, u64) {
    let mut best: Option<(f64, u64, (u64, u64))> = None;
    for gh in 1..=hi {
        let gw_min = lo.div_ceil(gh);
        let gw_max = hi / gh;
        if gw_min > gw_max {
            continue;
        }
        let ideal = gh as f64 / aspect_hw;
        let gw = (round_half_up(ideal) as u64).clamp(gw_min, gw_max);
        let err = ((gh as f64 / gw as f64) / aspect_hw).ln().abs();
        let better = match best {
            None => true,
            Some((e, p, _)) => err < e || (err == e && gh * gw > p),
        };
        if better {
            best = Some((err, gh * gw, (gh, gw)));
        }
    }
    best.expect("gh = 1, gw = lo is always feasible").2
}

pub fn plan_image(width: u64, height: u64, cfg: &BudgetConfig) -> Result<ImagePlan, BudgetError> {
    cfg.validate()?;
    if width == 0 || height == 0 {
        return Err(BudgetError::Dimensions { width, height });
    }
    let grid = fit_grid(height as f64, width as f64, cfg.cell(), 1, cfg.image_cap);
    Ok(ImagePlan::from_grid(grid, cfg.cell()))
}

/// Number of frames sampled at `fps` from `t = 0` strictly before `duration`.
fn sampled_frames(duration: f64, fps: f64) -> u64 {
    let x = duration * fps;
    let nearest = x.round();
    let n = if (x - nearest).abs() <= 1e-9 * x.max(1.0) { nearest } else { x.ceil() };
    (n as u64).max(1)
}

/// Plans frame sampling and per-frame resolution for a video.
///
/// 1. sample timestamps at `base_fps` from 0;
/// 2. per-frame grid from the image rule, held inside `[frame_min, frame_max]`;
/// 3. over `video_cap`: shrink frames toward `frame_min` first, then keep every
///    `k`-th frame for the smallest `k` that fits;
/// 4. `effective_fps = frames / duration`; time indices are `round(ts / tick)`.
pub fn plan_video(duration: f64, width: u64, height: u64, cfg: &BudgetConfig) -> Result<VideoPlan, BudgetError> {
    cfg.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(BudgetError::Duration(duration));
    }
    if width == 0 || height == 0 {
        return Err(BudgetError::Dimensions { width, height });
    }
    let (h, w, cell) = (height as f64, width as f64, cfg.cell());
    let n = sampled_frames(duration, cfg.base_fps);

    let mut grid = fit_grid(h, w, cell, cfg.frame_min, cfg.frame_max);
    if n.saturating_mul(product(grid)) > cfg.video_cap {
        let target = (cfg.video_cap / n).max(cfg.frame_min);
        if target < product(grid) {
            grid = fit_grid(h, w, cell, cfg.frame_min, target);
        }
    }
    let per_frame = product(grid);

    let stride = if n * per_frame > cfg.video_cap {
        let max_frames = cfg.video_cap / per_frame;
        n.div_ceil(max_frames)
    } else {
        1
    };
    let timestamps: Vec<f64> = (0..n).step_by(stride as usize).map(|i| i as f64 / cfg.base_fps).collect();
    let time_indices = temporal_positions(&timestamps, cfg.tick)?;
    Ok(VideoPlan {
        frame: ImagePlan::from_grid(grid, cell),
        effective_fps: timestamps.len() as f64 / duration,
        timestamps,
        per_frame_tokens: per_frame,
        time_indices,
    })
}
