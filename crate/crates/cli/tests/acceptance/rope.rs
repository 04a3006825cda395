use rand::Rng;

use kyc_core::rng::stream_rng;
use kyc_core::scalar::dot;
use kyc_core::vision_budget::{interpolate_pos_embed, rope2d_rotate, PosEmbedGrid, DEFAULT_ROPE_BASE};

use crate::Verdict;

pub fn relative_and_identity() -> Verdict {
    let mut rng = stream_rng(53, 0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let d = 4 * rng.gen_range(1..=32);
        let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut pos = || rng.gen_range(-512i64..512);
        let (r1, c1, r2, c2, dr, dc) = (pos(), pos(), pos(), pos(), pos(), pos());
        let ip = |a: i64, b: i64, c: i64, e: i64| {
            dot(
                &rope2d_rotate(&q, a, b, DEFAULT_ROPE_BASE).unwrap(),
                &rope2d_rotate(&k, c, e, DEFAULT_ROPE_BASE).unwrap(),
            )
        };
        worst = worst.max((ip(r1, c1, r2, c2) - ip(r1 + dr, c1 + dc, r2 + dr, c2 + dc)).abs());
    }

    let mut interp_worst = 0.0f64;
    for _ in 0..200 {
        let (rows, cols, dim) = (rng.gen_range(1..24), rng.gen_range(1..24), rng.gen_range(1..16));
        let values: Vec<f32> = (0..rows * cols * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = PosEmbedGrid::new(rows, cols, dim, values).unwrap();
        let same = interpolate_pos_embed(&g, rows, cols).unwrap();
        for (a, b) in g.values().iter().zip(same.values()) {
            interp_worst = interp_worst.max(f64::from((a - b).abs()));
        }
    }
    Verdict::new(
        worst <= 1e-6 && interp_worst <= 1e-6,
        format!(
            "10000 (q, k, offset) triples: max |deviation| {worst:.3e} (limit 1e-6); interpolation identity over 200 grids: max {interp_worst:.3e}"
        ),
    )
}
