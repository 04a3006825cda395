//! Seeded synthetic corpora for pipeline tests and benchmarks.
//!
//! Images are smooth random fields (a handful of low-frequency plane waves)
//! so that perceptual hashes carry signal. Near-duplicates are made by a mild
//! border crop followed by a bilinear rescale back to the original size.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::decontam::SampleManifestEntry;
use crate::dedup::LumaMatrix;
use crate::grounding::{Geometry, GroundingAnnotation, NormBox, NormCoord, RefKind, Reference};
use crate::rng::stream_rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    /// Total images across both splits.
    pub images: usize,
    pub side: usize,
    /// Fraction of images that belong to benchmarks.
    pub benchmark_fraction: f64,
    /// Fraction of train images that are near-copies of a benchmark image.
    pub planted_fraction: f64,
    pub benchmarks: Vec<String>,
    pub sources: Vec<String>,
    pub max_images_per_sample: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            images: 5000,
            side: 64,
            benchmark_fraction: 0.2,
            planted_fraction: 0.05,
            benchmarks: vec!["bench_a".into(), "bench_b".into()],
            sources: vec!["web".into(), "books".into(), "synthetic".into()],
            max_images_per_sample: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Benchmark images first, then train images, in id order.
    pub images: Vec<(String, LumaMatrix<f64>)>,
    pub benchmark: Vec<SampleManifestEntry>,
    pub train: Vec<SampleManifestEntry>,
    /// `(train image, benchmark image)` pairs built as near-copies.
    pub planted: Vec<(String, String)>,
}

/// Random smooth field in `[0, 1]`.
pub fn smooth_image(rng: &mut ChaCha8Rng, side: usize) -> LumaMatrix<f64> {
    let waves: Vec<[f64; 4]> = (0..6)
        .map(|_| {
            [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.05..0.25),
            ]
        })
        .collect();
    let n = side as f64;
    LumaMatrix::from_fn(side, side, |r, c| {
        let (y, x) = (r as f64 / n, c as f64 / n);
        let v: f64 = waves.iter().map(|[fx, fy, ph, a]| a * (TAU * (fx * x + fy * y) + ph).cos()).sum();
        (0.5 + v).clamp(0.0, 1.0)
    })
    .expect("side >= 1")
}

/// Crops up to `max_crop` pixels from each border, then rescales to the
/// original size.
pub fn near_copy(image: &LumaMatrix<f64>, rng: &mut ChaCha8Rng, max_crop: usize) -> LumaMatrix<f64> {
    let (rows, cols) = (image.rows(), image.cols());
    let mut cut = || rng.gen_range(0..=max_crop);
    let (top, bottom, left, right) = (cut(), cut(), cut(), cut());
    let (h, w) = (rows.saturating_sub(top + bottom).max(1), cols.saturating_sub(left + right).max(1));
    let top = top.min(rows - h);
    let left = left.min(cols - w);
    let cropped = LumaMatrix::from_fn(h, w, |r, c| image.get(top + r, left + c)).expect("non-empty crop");
    cropped.resize_bilinear(rows, cols).expect("non-empty target")
}

pub fn generate_corpus(cfg: &SynthConfig) -> SyntheticCorpus {
    assert!(!cfg.benchmarks.is_empty() && !cfg.sources.is_empty() && cfg.max_images_per_sample >= 1);
    let mut rng = stream_rng(cfg.seed, 0);
    let n_bench = ((cfg.images as f64 * cfg.benchmark_fraction).round() as usize).min(cfg.images);
    let n_train = cfg.images - n_bench;

    let mut images = Vec::with_capacity(cfg.images);
    let mut benchmark = Vec::with_capacity(n_bench);
    for i in 0..n_bench {
        let id = format!("bench-{i:05}");
        let name = &cfg.benchmarks[i % cfg.benchmarks.len()];
        benchmark.push(SampleManifestEntry::benchmark(format!("q{i:05}"), name.clone(), &[id.as_str()]));
        images.push((id, smooth_image(&mut rng, cfg.side)));
    }

    let mut planted = Vec::new();
    for i in 0..n_train {
        let id = format!("train-{i:05}");
        let img = if n_bench > 0 && rng.gen_bool(cfg.planted_fraction) {
            let j = rng.gen_range(0..n_bench);
            planted.push((id.clone(), images[j].0.clone()));
            let src = images[j].1.clone();
            near_copy(&src, &mut rng, 1)
        } else {
            smooth_image(&mut rng, cfg.side)
        };
        images.push((id, img));
    }

    let mut train = Vec::new();
    let mut next = 0;
    while next < n_train {
        let k = rng.gen_range(1..=cfg.max_images_per_sample).min(n_train - next);
        let ids: Vec<String> = (next..next + k).map(|i| format!("train-{i:05}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let source = &cfg.sources[rng.gen_range(0..cfg.sources.len())];
        train.push(SampleManifestEntry::train(format!("s{:05}", train.len()), source.clone(), &refs));
        next += k;
    }

    SyntheticCorpus { images, benchmark, train, planted }
}

const TEXT_ALPHABET: &[char] = &[
    'a', 'b', 'c', 'x', 'y', 'z', 'A', 'Q', '0', '7', ' ', '-', '_', ',', '.', '[', ']', '<', '>', '|', '"',
    '\'', 'é', 'ß', '猫', '字', '🙂',
];

fn random_coord(rng: &mut ChaCha8Rng) -> NormCoord {
    NormCoord::new(rng.gen_range(0..1000), rng.gen_range(0..1000)).expect("in range")
}

fn random_ring(rng: &mut ChaCha8Rng) -> Vec<NormCoord> {
    loop {
        let n = rng.gen_range(3..=8);
        let (cx, cy) = (rng.gen_range(100.0..900.0), rng.gen_range(100.0..900.0));
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        // increasing angle with y pointing down traces a clockwise ring
        let ring: Vec<NormCoord> = angles
            .iter()
            .map(|a| {
                let r: f64 = rng.gen_range(5.0..100.0);
                NormCoord::new((cx + r * a.cos()).round() as i64, (cy + r * a.sin()).round() as i64)
                    .expect("in range")
            })
            .collect();
        if crate::grounding::is_clockwise(&ring) == Ok(true) {
            return ring;
        }
    }
}

/// Random valid annotation. All nine (reference kind x geometry kind)
/// patterns are equally likely.
pub fn random_annotation(rng: &mut ChaCha8Rng) -> GroundingAnnotation {
    let reference = match rng.gen_range(0..3) {
        0 => None,
        k => {
            let len = rng.gen_range(0..12);
            let text = (0..len).map(|_| TEXT_ALPHABET[rng.gen_range(0..TEXT_ALPHABET.len())]).collect();
            Some(Reference { kind: if k == 1 { RefKind::Object } else { RefKind::Ocr }, text })
        }
    };
    let count = rng.gen_range(1..=4);
    let geometry = match rng.gen_range(0..3) {
        0 => Geometry::Points((0..count).map(|_| random_coord(rng)).collect()),
        1 => Geometry::Boxes(
            (0..count)
                .map(|_| {
                    let (a, b) = (random_coord(rng), random_coord(rng));
                    NormBox {
                        top_left: NormCoord::new(a.x().min(b.x()).into(), a.y().min(b.y()).into()).expect("in range"),
                        bottom_right: NormCoord::new(a.x().max(b.x()).into(), a.y().max(b.y()).into())
                            .expect("in range"),
                    }
                })
                .collect(),
        ),
        _ => Geometry::Polygons((0..count).map(|_| random_ring(rng)).collect()),
    };
    GroundingAnnotation::new(reference, geometry).expect("generated annotation is valid")
}
