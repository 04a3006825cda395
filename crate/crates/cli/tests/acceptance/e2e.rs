use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use kyc_core::rng::stream_rng;
use kyc_core::synth::{generate_corpus, SynthConfig};
use rand::Rng;

use crate::Verdict;

const SEED: u64 = 42;
const OUTPUTS: [&str; 9] = [
    "bench_hashes.jsonl",
    "train_hashes.jsonl",
    "bench.kydx",
    "flags.jsonl",
    "report.csv",
    "pack.json",
    "balance.json",
    "video.json",
    "image.json",
];

fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) {
    let mut f = fs::File::create(path).unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
}

/// Writes PNGs plus the image lists, manifest and work items.
fn materialize(dir: &Path) -> usize {
    let corpus = generate_corpus(&SynthConfig { seed: SEED, ..SynthConfig::default() });
    fs::create_dir_all(dir.join("img")).unwrap();
    let (mut bench, mut train) = (Vec::new(), Vec::new());
    for (id, m) in &corpus.images {
        let png = image::GrayImage::from_fn(m.cols() as u32, m.rows() as u32, |x, y| {
            image::Luma([(m.get(y as usize, x as usize) * 255.0).round().clamp(0.0, 255.0) as u8])
        });
        png.save(dir.join("img").join(format!("{id}.png"))).unwrap();
        let line = serde_json::json!({ "image_id": id, "path": format!("img/{id}.png") }).to_string();
        if id.starts_with("bench-") {
            bench.push(line);
        } else {
            train.push(line);
        }
    }
    write_lines(&dir.join("bench_images.jsonl"), bench);
    write_lines(&dir.join("train_images.jsonl"), train);
    write_lines(
        &dir.join("manifest.jsonl"),
        corpus.benchmark.iter().chain(&corpus.train).map(|s| serde_json::to_string(s).unwrap()),
    );
    let mut rng = stream_rng(SEED, 1);
    write_lines(
        &dir.join("items.jsonl"),
        corpus.train.iter().map(|s| {
            let tokens: u64 = rng.gen_range(64..4096);
            serde_json::json!({ "id": s.sample_id, "tokens": tokens }).to_string()
        }),
    );
    corpus.planted.len()
}

fn run(input: &Path, out: &Path, threads: &str) -> Result<(), String> {
    fs::create_dir_all(out).unwrap();
    let o = |f: &str| out.join(f).display().to_string();
    let i = |f: &str| input.join(f).display().to_string();
    let seed = SEED.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["hash".into(), "--images".into(), i("bench_images.jsonl"), "--out".into(), o("bench_hashes.jsonl")],
        vec!["hash".into(), "--images".into(), i("train_images.jsonl"), "--out".into(), o("train_hashes.jsonl")],
        vec!["index".into(), "--hashes".into(), o("bench_hashes.jsonl"), "--out".into(), o("bench.kydx")],
        vec![
            "dedup".into(),
            "--manifest".into(),
            i("manifest.jsonl"),
            "--hashes".into(),
            o("train_hashes.jsonl"),
            "--index".into(),
            o("bench.kydx"),
            "--flags".into(),
            o("flags.jsonl"),
            "--report".into(),
            o("report.csv"),
        ],
        vec!["pack".into(), "--items".into(), i("items.jsonl"), "--capacity".into(), "8192".into(), "--out".into(), o("pack.json")],
        vec![
            "balance".into(),
            "--items".into(),
            i("items.jsonl"),
            "--groups".into(),
            "8".into(),
            "--cost-mode".into(),
            "quadratic".into(),
            "--ctx".into(),
            "8192".into(),
            "--out".into(),
            o("balance.json"),
        ],
        vec![
            "budget".into(),
            "video".into(),
            "--duration".into(),
            "37.3".into(),
            "--width".into(),
            "1280".into(),
            "--height".into(),
            "720".into(),
            "--out".into(),
            o("video.json"),
        ],
        vec!["budget".into(), "image".into(), "--width".into(), "4032".into(), "--height".into(), "3024".into(), "--out".into(), o("image.json")],
    ];
    for args in steps {
        let status = Command::new(env!("CARGO_BIN_EXE_kyc"))
            .args(&args)
            .args(["--seed", &seed])
            .env("KYC_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("`kyc {}` failed: {}", args[0], String::from_utf8_lossy(&status.stderr).trim()));
        }
    }
    Ok(())
}

pub fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let planted = materialize(&input);
    let (a, b) = (tmp.path().join("run1"), tmp.path().join("run4"));
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        if let Err(e) = run(&input, dir, threads) {
            return Verdict::new(false, e);
        }
    }
    let mut differing = Vec::new();
    let mut bytes = 0usize;
    for f in OUTPUTS {
        let (x, y) = (fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
        bytes += x.len();
        if x != y {
            differing.push(f);
        }
    }
    let flagged = fs::read_to_string(a.join("flags.jsonl")).unwrap().lines().count();
    Verdict::new(
        differing.is_empty() && flagged > 0,
        format!(
            "{} output files ({bytes} bytes) across KYC_THREADS=1 and 4: {} differ {:?}; {flagged} flagged samples from {planted} planted near-copies",
            OUTPUTS.len(),
            differing.len(),
            differing
        ),
    )
}
