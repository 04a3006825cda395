use std::io::Read;
use std::path::Path;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use kyc_core::decontam::{
    filter_pair_score, read_embeddings_bin, scan_embedding_leakage, DecontamError, EmbeddingRecord,
    EmbeddingThresholds, ThresholdMode, EMBEDDING_MAGIC,
};

use crate::diag::{open_input, read_jsonl, write_jsonl, Diagnostics};
use crate::{EmbedArgs, ModeArg, PairArgs};

/// Records with their line numbers; binary records get line 0.
fn load_embeddings(path: &Path, diag: &mut Diagnostics) -> Result<Option<Vec<(usize, EmbeddingRecord<f64>)>>> {
    let mut head = [0u8; 5];
    let n = open_input(path)?.read(&mut head)?;
    if head[..n] == EMBEDDING_MAGIC.as_bytes()[..n] && n == EMBEDDING_MAGIC.len() {
        let mut r = std::io::BufReader::new(open_input(path)?);
        return match read_embeddings_bin::<f64, _>(&mut r) {
            Ok(recs) => Ok(Some(recs.into_iter().map(|r| (0, r)).collect())),
            Err(e) => {
                diag.report(path, 0, None, e);
                Ok(None)
            }
        };
    }
    let before = diag.count();
    let lines = read_jsonl::<EmbeddingRecord<f64>>(path, diag)?;
    if diag.count() > before {
        return Ok(None);
    }
    Ok(Some(lines.into_iter().map(|l| (l.line, l.value)).collect()))
}

#[derive(Serialize)]
struct IdLine<'a> {
    id: &'a str,
}

pub fn run(args: &EmbedArgs) -> Result<usize> {
    for (name, t) in [("--image-threshold", args.image_threshold), ("--text-threshold", args.text_threshold)] {
        if !t.is_finite() {
            bail!("{name} must be finite");
        }
    }
    let mut diag = Diagnostics::default();
    let train = load_embeddings(&args.train, &mut diag)?;
    let bench = load_embeddings(&args.bench, &mut diag)?;
    let (Some(train), Some(bench)) = (train, bench) else {
        return Ok(diag.count());
    };
    let thresholds = EmbeddingThresholds {
        image: args.image_threshold,
        text: args.text_threshold,
        mode: match args.mode {
            ModeArg::And => ThresholdMode::And,
            ModeArg::Or => ThresholdMode::Or,
        },
    };
    let t: Vec<_> = train.iter().map(|(_, r)| r.clone()).collect();
    let b: Vec<_> = bench.iter().map(|(_, r)| r.clone()).collect();
    match scan_embedding_leakage(&t, &b, &thresholds) {
        Ok(flagged) => {
            let lines: Vec<IdLine> = flagged.iter().map(|id| IdLine { id }).collect();
            write_jsonl(&args.out, &lines)?;
        }
        Err(DecontamError::Embedding { id, reason }) => {
            let (path, line) = train
                .iter()
                .find(|(_, r)| r.id == id)
                .map(|(l, _)| (&args.train, *l))
                .or_else(|| bench.iter().find(|(_, r)| r.id == id).map(|(l, _)| (&args.bench, *l)))
                .unwrap_or((&args.train, 0));
            diag.report(path, line, Some(&id), reason);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(diag.count())
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreLine {
    id: String,
    score: f64,
}

pub fn filter_pairs(args: &PairArgs) -> Result<usize> {
    if !args.threshold.is_finite() {
        bail!("--threshold must be finite");
    }
    let mut diag = Diagnostics::default();
    let lines = read_jsonl::<ScoreLine>(&args.scores, &mut diag)?;
    // positions as ids keep repeated ids apart
    let records: Vec<(String, f64)> = lines.iter().enumerate().map(|(i, l)| (i.to_string(), l.value.score)).collect();
    let split = filter_pair_score(&records, args.threshold)?;
    let rows = |ids: &[String]| -> Vec<&ScoreLine> {
        ids.iter().map(|i| &lines[i.parse::<usize>().expect("position id")].value).collect()
    };
    write_jsonl(&args.kept, rows(&split.kept))?;
    write_jsonl(&args.dropped, rows(&split.dropped))?;
    Ok(diag.count())
}
