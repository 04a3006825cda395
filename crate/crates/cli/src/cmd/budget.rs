use anyhow::Result;

use kyc_core::vision_budget::{plan_image, plan_video, BudgetConfig};

use crate::diag::emit_json;
use crate::{BudgetCmd, BudgetOverrides};

fn config(o: &BudgetOverrides) -> Result<BudgetConfig> {
    let d = BudgetConfig::default();
    let cfg = BudgetConfig {
        patch: o.patch.unwrap_or(d.patch),
        merge: o.merge.unwrap_or(d.merge),
        image_cap: o.image_cap.unwrap_or(d.image_cap),
        frame_min: o.frame_min.unwrap_or(d.frame_min),
        frame_max: o.frame_max.unwrap_or(d.frame_max),
        video_cap: o.video_cap.unwrap_or(d.video_cap),
        tick: o.tick.unwrap_or(d.tick),
        base_fps: o.base_fps.unwrap_or(d.base_fps),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cmd: &BudgetCmd) -> Result<usize> {
    match cmd {
        BudgetCmd::Image { width, height, out, cfg } => {
            let plan = plan_image(*width, *height, &config(cfg)?)?;
            emit_json(out.as_deref(), &plan.to_json())?;
        }
        BudgetCmd::Video { duration, width, height, out, cfg } => {
            let plan = plan_video(*duration, *width, *height, &config(cfg)?)?;
            emit_json(out.as_deref(), &plan.to_json())?;
        }
    }
    Ok(0)
}
