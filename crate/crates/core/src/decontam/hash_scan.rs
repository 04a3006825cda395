use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{DecontamError, LeakageReport, SampleManifestEntry, Split};
use crate::dedup::{LshIndex, OnesSet};

/// Result of a hash-based leakage scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HashLeakage {
    /// Flagged training sample -> benchmarks it collided with.
    pub samples: BTreeMap<String, BTreeSet<String>>,
    /// Flagged training image -> benchmark image ids it duplicates.
    pub images: BTreeMap<String, BTreeSet<String>>,
    pub report: LeakageReport,
}

impl HashLeakage {
    pub fn flagged_samples(&self) -> BTreeSet<String> {
        self.samples.keys().cloned().collect()
    }

    pub fn is_flagged(&self, sample_id: &str) -> bool {
        self.samples.contains_key(sample_id)
    }
}

/// Maps every benchmark image id to the benchmark that owns it.
pub fn benchmark_owners(
    entries: &[SampleManifestEntry],
) -> Result<HashMap<String, String>, DecontamError> {
    let mut owners: HashMap<String, String> = HashMap::new();
    for e in entries {
        e.validate()?;
        if e.split != Split::Benchmark {
            return Err(DecontamError::InvalidEntry {
                sample_id: e.sample_id.clone(),
                reason: "expected a benchmark sample".into(),
            });
        }
        let name = e.benchmark_name.as_ref().expect("validated");
        for img in &e.image_ids {
            match owners.get(img) {
                Some(prev) if prev != name => {
                    return Err(DecontamError::ConflictingAttribution {
                        image_id: img.clone(),
                        first: prev.clone(),
                        second: name.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    owners.insert(img.clone(), name.clone());
                }
            }
        }
    }
    Ok(owners)
}

/// Flags every training sample with at least one image whose hash verifies
/// as a duplicate (Jaccard > 0.95) of some indexed benchmark image.
///
/// A sample colliding with several benchmarks is counted once per benchmark
/// in the report but appears once in the flagged set.
pub fn scan_hash_leakage(
    train: &[SampleManifestEntry],
    train_hashes: &HashMap<String, OnesSet>,
    bench_index: &LshIndex,
    bench_owners: &HashMap<String, String>,
    seed: u64,
) -> Result<HashLeakage, DecontamError> {
    // image id -> benchmark image ids it duplicates (empty if clean)
    let mut verdict_cache: HashMap<&str, BTreeSet<String>> = HashMap::new();
    let mut out = HashLeakage::default();

    for sample in train {
        sample.validate()?;
        if sample.split != Split::Train {
            return Err(DecontamError::InvalidEntry {
                sample_id: sample.sample_id.clone(),
                reason: "expected a train sample".into(),
            });
        }
        let mut hit_benchmarks = BTreeSet::new();
        for image_id in &sample.image_ids {
            let set = *train_hashes.get(image_id).ok_or_else(|| DecontamError::MissingHash {
                sample_id: sample.sample_id.clone(),
                image_id: image_id.clone(),
            })?;
            if !verdict_cache.contains_key(image_id.as_str()) {
                let dups: BTreeSet<String> = bench_index
                    .query_duplicates(image_id, set, seed)?
                    .into_iter()
                    .map(|v| v.id_b)
                    .collect();
                verdict_cache.insert(image_id.as_str(), dups);
            }
            let dups = &verdict_cache[image_id.as_str()];
            if dups.is_empty() {
                continue;
            }
            out.images.entry(image_id.clone()).or_insert_with(|| dups.clone());
            for bench_image in dups {
                let owner = bench_owners
                    .get(bench_image)
                    .ok_or_else(|| DecontamError::MissingAttribution(bench_image.clone()))?;
                hit_benchmarks.insert(owner.clone());
            }
        }
        if hit_benchmarks.is_empty() {
            continue;
        }
        for bench in &hit_benchmarks {
            out.report.add(sample.source_or_unknown(), bench, 1);
        }
        out.samples
            .entry(sample.sample_id.clone())
            .or_default()
            .extend(hit_benchmarks);
    }
    Ok(out)
}
