use std::collections::{BTreeMap, BTreeSet, HashMap};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use kyc_core::decontam::{
    benchmark_owners, emit_report, scan_hash_leakage, HashLeakage, ReportFormat, SampleManifestEntry, Split,
};
use kyc_core::dedup::{LshConfig, LshIndex, OnesSet, PHash64};

use super::hash::HashRecord;
use crate::diag::{open_input, read_jsonl, write_bytes, write_jsonl, Diagnostics, Shard};
use crate::{DedupArgs, IndexArgs, ReportFormatArg};

const SCAN_CHUNK: usize = 256;

fn load_hashes(path: &std::path::Path, diag: &mut Diagnostics) -> Result<Vec<(usize, String, OnesSet)>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for line in read_jsonl::<HashRecord>(path, diag)? {
        let rec = line.value;
        let Some(h) = PHash64::from_hex(&rec.phash) else {
            diag.report(path, line.line, Some(&rec.image_id), format!("bad phash {:?}", rec.phash));
            continue;
        };
        let set = kyc_core::dedup::ones_positions(h);
        if set.positions() != rec.ones {
            diag.report(path, line.line, Some(&rec.image_id), "ones do not match phash");
            continue;
        }
        if !seen.insert(rec.image_id.clone()) {
            diag.report(path, line.line, Some(&rec.image_id), "duplicate image_id");
            continue;
        }
        out.push((line.line, rec.image_id, set));
    }
    Ok(out)
}

pub fn index(args: &IndexArgs, seed: u64) -> Result<usize> {
    let config = LshConfig::new(seed, args.bands, args.rows)?;
    let mut diag = Diagnostics::default();
    let hashes = load_hashes(&args.hashes, &mut diag)?;
    let mut index = LshIndex::new(config)?;
    for (_, id, set) in hashes {
        index.insert(id, set)?;
    }
    write_bytes(&args.out, &index.to_bytes())?;
    Ok(diag.count())
}

#[derive(Serialize)]
struct FlagLine<'a> {
    sample_id: &'a str,
    benchmarks: &'a BTreeSet<String>,
    /// Flagged images of the sample with the benchmark images they match.
    images: BTreeMap<&'a str, &'a BTreeSet<String>>,
}

fn merge_leakage(mut acc: HashLeakage, part: HashLeakage) -> HashLeakage {
    acc.samples.extend(part.samples);
    acc.images.extend(part.images);
    acc.report.merge(&part.report);
    acc
}

pub fn dedup(args: &DedupArgs, seed: u64) -> Result<usize> {
    let shard = Shard::new(args.shard.shard_count, args.shard.shard_index)?;
    let mut diag = Diagnostics::default();

    let index = {
        let mut f = std::io::BufReader::new(open_input(&args.index)?);
        match LshIndex::read_from(&mut f) {
            Ok(ix) => ix,
            Err(e) => {
                diag.report(&args.index, 0, None, e);
                return Ok(diag.count());
            }
        }
    };
    if index.config().seed != seed {
        bail!("index {} was built with seed {}, but --seed is {seed}", args.index.display(), index.config().seed);
    }

    let mut train = Vec::new();
    let mut bench = Vec::new();
    for line in read_jsonl::<SampleManifestEntry>(&args.manifest, &mut diag)? {
        if let Err(e) = line.value.validate() {
            diag.report(&args.manifest, line.line, Some(&line.value.sample_id), e);
            continue;
        }
        match line.value.split {
            Split::Train => train.push(line),
            Split::Benchmark => bench.push(line.value),
        }
    }
    let owners = match benchmark_owners(&bench) {
        Ok(o) => o,
        Err(e) => {
            diag.report(&args.manifest, 0, None, e);
            return Ok(diag.count());
        }
    };
    let unowned: Vec<String> =
        index.records().filter(|(id, _, _)| !owners.contains_key(*id)).map(|(id, _, _)| id.to_string()).collect();
    if !unowned.is_empty() {
        for id in unowned {
            diag.report(&args.index, 0, Some(&id), "indexed image has no benchmark entry in the manifest");
        }
        return Ok(diag.count());
    }

    let hashes: HashMap<String, OnesSet> =
        load_hashes(&args.hashes, &mut diag)?.into_iter().map(|(_, id, set)| (id, set)).collect();

    let mut samples: Vec<SampleManifestEntry> = Vec::new();
    for line in train {
        if !shard.owns(&line.value.sample_id) {
            continue;
        }
        let missing: Vec<&String> = line.value.image_ids.iter().filter(|i| !hashes.contains_key(*i)).collect();
        if missing.is_empty() {
            samples.push(line.value);
        } else {
            for m in missing {
                diag.report(&args.manifest, line.line, Some(&line.value.sample_id), format!("image {m:?} has no hash"));
            }
        }
    }

    let leakage = samples
        .par_chunks(SCAN_CHUNK)
        .map(|chunk| scan_hash_leakage(chunk, &hashes, &index, &owners, seed))
        .collect::<Result<Vec<_>, _>>()
        .context("hash scan")?
        .into_iter()
        .fold(HashLeakage::default(), merge_leakage);

    let by_id: HashMap<&str, &SampleManifestEntry> = samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();
    let flags: Vec<FlagLine> = leakage
        .samples
        .iter()
        .map(|(sid, benchmarks)| FlagLine {
            sample_id: sid,
            benchmarks,
            images: by_id[sid.as_str()]
                .image_ids
                .iter()
                .filter_map(|img| leakage.images.get_key_value(img).map(|(k, v)| (k.as_str(), v)))
                .collect(),
        })
        .collect();
    write_jsonl(&args.flags, &flags)?;
    let format = match args.report_format {
        ReportFormatArg::Csv => ReportFormat::Csv,
        ReportFormatArg::Json => ReportFormat::Json,
    };
    write_bytes(&args.report, &emit_report(&leakage.report, format))?;
    Ok(diag.count())
}
