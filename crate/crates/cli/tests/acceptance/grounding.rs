use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::Rng;

use kyc_core::grounding::{parse, parse_bytes, serialize, RESERVED_TOKENS};
use kyc_core::rng::stream_rng;
use kyc_core::synth::random_annotation;

use crate::Verdict;

const PIECES: &[&str] = &["[", "]", "[[", "]]", ",", ", ", " ", "-", ".", "0", "7", "42", "999", "1000", "x", "\n"];

/// Random bytes, token soup, or a mutated valid label.
fn fuzz_input(rng: &mut impl Rng, seed_label: &str) -> Vec<u8> {
    match rng.gen_range(0..3) {
        0 => (0..rng.gen_range(0..64)).map(|_| rng.gen()).collect(),
        1 => {
            let mut s = Vec::new();
            for _ in 0..rng.gen_range(0..24) {
                if rng.gen_bool(0.3) {
                    s.extend_from_slice(RESERVED_TOKENS[rng.gen_range(0..RESERVED_TOKENS.len())].as_bytes());
                } else {
                    s.extend_from_slice(PIECES[rng.gen_range(0..PIECES.len())].as_bytes());
                }
            }
            s
        }
        _ => {
            let mut s = seed_label.as_bytes().to_vec();
            for _ in 0..rng.gen_range(1..4) {
                if s.is_empty() {
                    break;
                }
                let i = rng.gen_range(0..s.len());
                match rng.gen_range(0..3) {
                    0 => s[i] = rng.gen(),
                    1 => {
                        s.remove(i);
                    }
                    _ => s.truncate(i),
                }
            }
            s
        }
    }
}

pub fn round_trip_and_fuzz() -> Verdict {
    let mut rng = stream_rng(31, 0);
    let mut patterns: BTreeMap<(String, &str), usize> = BTreeMap::new();
    let mut round_trip_failures = 0;
    let mut labels = Vec::with_capacity(1000);
    for _ in 0..100_000 {
        let ann = random_annotation(&mut rng);
        let key = (ann.reference().map_or("none", |r| r.kind.as_str()).to_string(), ann.kind().as_str());
        *patterns.entry(key).or_default() += 1;
        let s = serialize(&ann);
        match parse(&s) {
            Ok(v) if v.len() == 1 && v[0] == ann && serialize(&v[0]) == s => {}
            _ => round_trip_failures += 1,
        }
        if labels.len() < 1000 {
            labels.push(s);
        }
    }

    let mut fuzz_rng = stream_rng(31, 1);
    let (mut panics, mut accepted, mut unstable) = (0, 0, 0);
    for i in 0..1_000_000 {
        let input = fuzz_input(&mut fuzz_rng, &labels[i % labels.len()]);
        match catch_unwind(AssertUnwindSafe(|| parse_bytes(&input))) {
            Err(_) => panics += 1,
            Ok(Ok(anns)) => {
                accepted += 1;
                // anything accepted must survive a canonical round trip
                for a in &anns {
                    if parse(&serialize(a)).ok().as_deref() != Some(std::slice::from_ref(a)) {
                        unstable += 1;
                    }
                }
            }
            Ok(Err(_)) => {}
        }
    }
    let pass = round_trip_failures == 0 && patterns.len() == 9 && panics == 0 && unstable == 0;
    Verdict::new(
        pass,
        format!(
            "100000 annotations over {} (reference x geometry) patterns, {round_trip_failures} round-trip failures; 1000000 fuzz inputs, {panics} panics, {accepted} accepted, {unstable} unstable",
            patterns.len()
        ),
    )
}
