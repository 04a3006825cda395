use std::collections::HashSet;

use anyhow::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kyc_core::dedup::{compute_phash, ones_positions};

use crate::decode::decode_image;
use crate::diag::{read_jsonl, resolve, write_jsonl, Diagnostics, Shard};
use crate::HashArgs;

#[derive(Debug, Deserialize)]
struct ImageEntry {
    image_id: String,
    path: String,
}

/// One line of a hash file. `phash` is 16 lowercase hex digits; `ones` lists
/// its set bit positions.
#[derive(Debug, Serialize, Deserialize)]
pub struct HashRecord {
    pub image_id: String,
    pub phash: String,
    pub ones: Vec<u32>,
}

pub fn run(args: &HashArgs) -> Result<usize> {
    let shard = Shard::new(args.shard.shard_count, args.shard.shard_index)?;
    let mut diag = Diagnostics::default();
    let entries = read_jsonl::<ImageEntry>(&args.images, &mut diag)?;
    let mut seen = HashSet::new();
    let mut todo = Vec::new();
    for e in entries {
        if !seen.insert(e.value.image_id.clone()) {
            diag.report(&args.images, e.line, Some(&e.value.image_id), "duplicate image_id");
            continue;
        }
        if shard.owns(&e.value.image_id) {
            todo.push(e);
        }
    }
    let hashed: Vec<Result<HashRecord, String>> = todo
        .par_iter()
        .map(|e| {
            let img = decode_image(&resolve(&args.images, &e.value.path))?;
            let h = compute_phash(&img);
            Ok(HashRecord { image_id: e.value.image_id.clone(), phash: h.to_hex(), ones: ones_positions(h).positions() })
        })
        .collect();
    let mut out = Vec::with_capacity(hashed.len());
    for (e, r) in todo.iter().zip(hashed) {
        match r {
            Ok(rec) => out.push(rec),
            Err(msg) => diag.report(&args.images, e.line, Some(&e.value.image_id), msg),
        }
    }
    write_jsonl(&args.out, &out)?;
    Ok(diag.count())
}
