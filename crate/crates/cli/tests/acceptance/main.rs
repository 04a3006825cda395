//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

mod budget;
mod decontam;
mod e2e;
mod grounding;
mod merge;
mod resume;
mod rope;
mod sched;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

/// Outcome of one criterion: pass flag and a one-line measurement.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Criterion = (&'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 11] = [
    ("decontam-oracle-equivalence", decontam::oracle_equivalence),
    ("minhash-calibration", decontam::minhash_calibration),
    ("whole-sample-drop-rule", decontam::whole_sample_rule),
    ("embedding-threshold-boundaries", decontam::embedding_boundaries),
    ("grounding-round-trip-and-fuzz", grounding::round_trip_and_fuzz),
    ("video-budget-invariants", budget::video_invariants),
    ("rope-relative-and-interp-identity", rope::relative_and_identity),
    ("lpt-ffd-bounds-exhaustive", sched::exhaustive_bounds),
    ("resume-equivalence", resume::resume_equivalence),
    ("merge-properties", merge::merge_properties),
    ("cli-end-to-end-determinism", e2e::determinism),
];

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Verdict::new(false, format!("panicked: {msg}"))
            });
        let secs = start.elapsed().as_secs_f64();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {:02} {name}: {} [{secs:.2} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
