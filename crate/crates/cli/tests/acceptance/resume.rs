use kyc_core::pack_balance::{load_cursor_file, save_cursor_file, ShardedStream, StreamSample};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::Verdict;

const TRIALS: u64 = 100;
const CHECK_LEN: usize = 5000;

pub fn resume_equivalence() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut rng = StdRng::seed_from_u64(0x5e5);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for trial in 0..TRIALS {
        let seed: u64 = rng.gen();
        let shards = rng.gen_range(1..=5);
        let mut sizes: Vec<u64> = (0..shards).map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..2000) }).collect();
        if sizes.iter().all(|&s| s == 0) {
            sizes[0] = rng.gen_range(1..2000);
        }
        let total: u64 = sizes.iter().sum();
        let cut = rng.gen_range(0..3 * total) as usize;

        let reference: Vec<StreamSample> = ShardedStream::new(sizes.clone(), seed).unwrap().take(cut + CHECK_LEN).collect();

        let mut live = ShardedStream::new(sizes.clone(), seed).unwrap();
        for _ in 0..cut {
            live.next();
        }
        let path = dir.path().join(format!("cursor-{trial}.bin"));
        save_cursor_file(&path, &live.cursor()).unwrap();
        drop(live);
        let cursor = load_cursor_file(&path).unwrap();
        let resumed: Vec<StreamSample> = ShardedStream::resume(sizes.clone(), &cursor).unwrap().take(CHECK_LEN).collect();
        checked += resumed.len();
        if resumed[..] != reference[cut..] {
            failures.push(format!("trial {trial} (seed {seed}, sizes {sizes:?}, cut {cut})"));
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{TRIALS} trials via on-disk cursor, {checked} resumed samples compared: {} mismatches{}",
            failures.len(),
            failures.first().map(|f| format!("; first {f}")).unwrap_or_default()
        ),
    )
}
