use rand::Rng;

use kyc_core::rng::stream_rng;
use kyc_core::vision_budget::{plan_video, BudgetConfig};

use crate::Verdict;

pub fn video_invariants() -> Verdict {
    let cfg = BudgetConfig::default();
    let mut rng = stream_rng(41, 0);
    let mut violations = 0;
    let mut first = None;
    let (mut strided, mut shrunk) = (0, 0);
    for i in 0..100_000 {
        // log-uniform durations from 0.05 s to ~3 h, sides from 1 to 8192 px
        let duration = 10f64.powf(rng.gen_range(-1.3..4.0));
        let (w, h) = (rng.gen_range(1..=8192u64), rng.gen_range(1..=8192u64));
        let p = plan_video(duration, w, h, &cfg).expect("valid video");
        let per = p.per_frame_tokens;
        let ok_frame = (128..=768).contains(&per) && per == p.frame.grid_h * p.frame.grid_w;
        let ok_total = p.frames() as u64 * per <= 24576;
        let ok_time = p.timestamps.len() == p.time_indices.len()
            && p.timestamps.iter().zip(&p.time_indices).all(|(&ts, &t)| (ts / 0.5).round() == t as f64);
        if !(ok_frame && ok_total && ok_time && p.frames() >= 1) {
            violations += 1;
            first.get_or_insert(format!("#{i}: {duration} s {w}x{h}"));
        }
        if p.frames() as f64 + 1.0 < duration * 2.0 {
            strided += 1;
        }
        if per == 128 {
            shrunk += 1;
        }
    }
    Verdict::new(
        violations == 0,
        format!(
            "100000 specs, {violations} violations{}; {strided} plans thinned frames, {shrunk} at the 128-token floor",
            first.map(|f| format!(" (first {f})")).unwrap_or_default()
        ),
    )
}
