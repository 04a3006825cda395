use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use rand::Rng;

use kyc_core::decontam::{
    benchmark_owners, scan_embedding_leakage, scan_hash_leakage, EmbeddingRecord, EmbeddingThresholds,
    SampleManifestEntry, ThresholdMode,
};
use kyc_core::dedup::{build_lsh_index, compute_phash, minhash_signature, ones_positions, OnesSet};
use kyc_core::rng::stream_rng;
use kyc_core::synth::{generate_corpus, SynthConfig};

use crate::Verdict;

/// Independent oracle: `|a & b| / |a | b| > 19/20` in integers, both-empty
/// counting as identical.
fn oracle_dup(a: u64, b: u64) -> bool {
    let (i, u) = ((a & b).count_ones(), (a | b).count_ones());
    u == 0 || 20 * i > 19 * u
}

pub fn oracle_equivalence() -> Verdict {
    let corpus = generate_corpus(&SynthConfig { seed: 7, ..SynthConfig::default() });
    let seed = 99;

    let start = Instant::now();
    let hashes: HashMap<String, OnesSet> =
        corpus.images.iter().map(|(id, m)| (id.clone(), ones_positions(compute_phash(m)))).collect();
    let bench_ids: Vec<&String> = corpus.benchmark.iter().flat_map(|s| &s.image_ids).collect();
    let index = build_lsh_index(bench_ids.iter().map(|id| (id.as_str(), hashes[*id])), seed, 32, 4).unwrap();
    let owners = benchmark_owners(&corpus.benchmark).unwrap();
    let out = scan_hash_leakage(&corpus.train, &hashes, &index, &owners, seed).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut expected: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let train_ids: Vec<&String> = corpus.train.iter().flat_map(|s| &s.image_ids).collect();
    for t in &train_ids {
        for b in &bench_ids {
            if oracle_dup(hashes[*t].mask(), hashes[*b].mask()) {
                expected.entry((*t).clone()).or_default().insert((*b).clone());
            }
        }
    }
    let pairs = |m: &BTreeMap<String, BTreeSet<String>>| -> BTreeSet<(String, String)> {
        m.iter().flat_map(|(t, bs)| bs.iter().map(move |b| (t.clone(), b.clone()))).collect()
    };
    let (got, want) = (pairs(&out.images), pairs(&expected));
    let missed = want.difference(&got).count();
    let spurious = got.difference(&want).count();
    let want_samples: BTreeSet<String> = corpus
        .train
        .iter()
        .filter(|s| s.image_ids.iter().any(|i| expected.contains_key(i)))
        .map(|s| s.sample_id.clone())
        .collect();
    let samples_ok = out.flagged_samples() == want_samples;
    Verdict::new(
        missed == 0 && spurious == 0 && samples_ok && elapsed < 10.0 && !want.is_empty(),
        format!(
            "{} images, {} duplicate pairs, {missed} missed, {spurious} spurious, {} samples flagged (match: {samples_ok}), pipeline {elapsed:.2} s single-threaded (limit 10 s)",
            corpus.images.len(),
            want.len(),
            want_samples.len()
        ),
    )
}

fn random_subset(rng: &mut impl Rng, size: usize, exclude: u64) -> u64 {
    let mut m = 0u64;
    while (m.count_ones() as usize) < size {
        let b = 1u64 << rng.gen_range(0..64);
        if b & exclude == 0 {
            m |= b;
        }
    }
    m
}

pub fn minhash_calibration() -> Verdict {
    let mut rng = stream_rng(5, 0);
    let trials = 1000;
    let mut within = 0;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let k = rng.gen_range(0..=32);
        let a = random_subset(&mut rng, 32, 0);
        // k shared elements plus 32 - k outside a
        let mut shared = 0u64;
        while (shared.count_ones() as usize) < k {
            let b = 1u64 << rng.gen_range(0..64);
            if b & a != 0 {
                shared |= b;
            }
        }
        let b = shared | random_subset(&mut rng, 32 - k, a);
        let j = k as f64 / (64 - k) as f64;
        let est = minhash_signature(OnesSet::from_mask(a), t)
            .agreement(&minhash_signature(OnesSet::from_mask(b), t));
        let tol = 3.0 * (j * (1.0 - j) / 128.0).sqrt();
        let dev = (est - j).abs();
        worst = worst.max(dev / tol.max(f64::MIN_POSITIVE));
        if dev <= tol + 1e-12 {
            within += 1;
        }
    }
    let frac = within as f64 / trials as f64;
    Verdict::new(
        frac >= 0.99,
        format!("{within}/{trials} pairs within 3 sigma ({:.1}%, need >= 99%)", 100.0 * frac),
    )
}

pub fn whole_sample_rule() -> Verdict {
    let mut rng = stream_rng(17, 0);
    let bench_sets: Vec<u64> = (0..300)
        .map(|_| {
            let size = rng.gen_range(20..44);
            random_subset(&mut rng, size, 0)
        }).collect();
    let bench: Vec<SampleManifestEntry> = (0..bench_sets.len())
        .map(|i| SampleManifestEntry::benchmark(format!("q{i}"), format!("b{}", i % 3), &[&format!("bi{i}")]))
        .collect();
    let index =
        build_lsh_index(bench_sets.iter().enumerate().map(|(i, &m)| (format!("bi{i}"), OnesSet::from_mask(m))), 3, 32, 4)
            .unwrap();
    let owners = benchmark_owners(&bench).unwrap();

    let mut hashes = HashMap::new();
    let mut train = Vec::new();
    let mut expected = BTreeSet::new();
    for s in 0..10_000 {
        let n = rng.gen_range(1..=5);
        let mut ids = Vec::new();
        let mut any = false;
        for k in 0..n {
            let id = format!("s{s}i{k}");
            let mask = match rng.gen_range(0..10) {
                // exact copy
                0 => bench_sets[rng.gen_range(0..bench_sets.len())],
                // one bit flipped: Jaccard 31/32 .. 43/44 or lower for small sets
                1 => bench_sets[rng.gen_range(0..bench_sets.len())] ^ (1u64 << rng.gen_range(0..64)),
                _ => {
                    let size = rng.gen_range(16..48);
                    random_subset(&mut rng, size, 0)
                }
            };
            any |= bench_sets.iter().any(|&b| oracle_dup(mask, b));
            hashes.insert(id.clone(), OnesSet::from_mask(mask));
            ids.push(id);
        }
        if any {
            expected.insert(format!("s{s}"));
        }
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        train.push(SampleManifestEntry::train(format!("s{s}"), "web", &refs));
    }
    let out = scan_hash_leakage(&train, &hashes, &index, &owners, 3).unwrap();
    let got = out.flagged_samples();
    let agree = train.iter().filter(|s| got.contains(&s.sample_id) == expected.contains(&s.sample_id)).count();
    Verdict::new(
        agree == train.len(),
        format!("{agree}/{} samples agree with any-image oracle ({} flagged)", train.len(), expected.len()),
    )
}

fn rec(id: &str, image: Vec<f64>, text: Vec<f64>) -> EmbeddingRecord<f64> {
    EmbeddingRecord { id: id.into(), image_vec: image, text_vec: text }
}

fn unit_at(c: f64) -> Vec<f64> {
    vec![c, (1.0 - c * c).sqrt()]
}

pub fn embedding_boundaries() -> Verdict {
    let bench = vec![rec("b", vec![1.0, 0.0], vec![1.0, 0.0])];
    let and = EmbeddingThresholds::<f64>::default();
    let or = EmbeddingThresholds { mode: ThresholdMode::Or, ..and };
    let cases: Vec<(&str, EmbeddingRecord<f64>, bool, bool)> = vec![
        ("identity", rec("t", vec![1.0, 0.0], vec![1.0, 0.0]), true, true),
        ("image exactly 0.98", rec("t", unit_at(0.98), vec![1.0, 0.0]), false, true),
        ("image just above 0.98", rec("t", unit_at(0.980_000_1), vec![1.0, 0.0]), true, true),
        ("text exactly 0.50", rec("t", vec![1.0, 0.0], unit_at(0.5)), false, true),
        ("text just above 0.50", rec("t", unit_at(0.99), unit_at(0.500_000_1)), true, true),
        ("image 0.99 text 0.40", rec("t", unit_at(0.99), unit_at(0.40)), false, true),
        ("both exactly at threshold", rec("t", unit_at(0.98), unit_at(0.5)), false, false),
        ("orthogonal image", rec("t", vec![0.0, 1.0], vec![1.0, 0.0]), false, true),
    ];
    let mut bad = Vec::new();
    for (name, r, want_and, want_or) in &cases {
        let got_and = !scan_embedding_leakage(std::slice::from_ref(r), &bench, &and).unwrap().is_empty();
        let got_or = !scan_embedding_leakage(std::slice::from_ref(r), &bench, &or).unwrap().is_empty();
        if got_and != *want_and || got_or != *want_or {
            bad.push(*name);
        }
    }
    // single precision: the f32 literal threshold against an f32 dot product
    let b32 = vec![EmbeddingRecord { id: "b".into(), image_vec: vec![1.0f32, 0.0], text_vec: vec![1.0f32, 0.0] }];
    let t32 = EmbeddingRecord {
        id: "t".into(),
        image_vec: vec![0.98f32, (1.0f32 - 0.98 * 0.98).sqrt()],
        text_vec: vec![1.0f32, 0.0],
    };
    if !scan_embedding_leakage(&[t32], &b32, &EmbeddingThresholds::<f32>::default()).unwrap().is_empty() {
        bad.push("f32 image exactly 0.98");
    }
    Verdict::new(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} boundary cases (AND and OR) plus f32 equality case behave strictly", cases.len())
        } else {
            format!("wrong verdicts: {bad:?}")
        },
    )
}
