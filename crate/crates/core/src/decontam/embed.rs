use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::DecontamError;
use crate::binio::{self, FormatError};
use crate::scalar::{dot, l2_norm, Scalar};

pub const EMBEDDING_MAGIC: &str = "KYEM1";
/// Allowed deviation of a vector's L2 norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-3;

/// Precomputed image and text embeddings of one image-question pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord<T> {
    pub id: String,
    pub image_vec: Vec<T>,
    pub text_vec: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Flag when both similarities exceed their thresholds.
    And,
    /// Flag when either similarity exceeds its threshold.
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingThresholds<T> {
    pub image: T,
    pub text: T,
    pub mode: ThresholdMode,
}

impl<T: Scalar> Default for EmbeddingThresholds<T> {
    fn default() -> Self {
        Self {
            image: T::lit(0.98),
            text: T::lit(0.50),
            mode: ThresholdMode::And,
        }
    }
}

impl<T: Scalar> EmbeddingThresholds<T> {
    fn flags(&self, image_cos: T, text_cos: T) -> bool {
        let img = image_cos > self.image;
        let txt = text_cos > self.text;
        match self.mode {
            ThresholdMode::And => img && txt,
            ThresholdMode::Or => img || txt,
        }
    }
}

struct Dims {
    image: usize,
    text: usize,
}

fn check_record<T: Scalar>(rec: &EmbeddingRecord<T>, dims: &mut Option<Dims>) -> Result<(), DecontamError> {
    let bad = |reason: String| DecontamError::Embedding {
        id: rec.id.clone(),
        reason,
    };
    let d = dims.get_or_insert(Dims {
        image: rec.image_vec.len(),
        text: rec.text_vec.len(),
    });
    if rec.image_vec.is_empty() || rec.text_vec.is_empty() {
        return Err(bad("empty vector".into()));
    }
    if rec.image_vec.len() != d.image || rec.text_vec.len() != d.text {
        return Err(bad(format!(
            "dimensions ({}, {}) differ from corpus dimensions ({}, {})",
            rec.image_vec.len(),
            rec.text_vec.len(),
            d.image,
            d.text
        )));
    }
    for (name, v) in [("image_vec", &rec.image_vec), ("text_vec", &rec.text_vec)] {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(bad(format!("{name} has a non-finite component")));
        }
        let n = l2_norm(v).as_f64();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(bad(format!("{name} has L2 norm {n}, expected 1 within {NORM_TOLERANCE}")));
        }
    }
    Ok(())
}

/// Ids of training records whose image and text cosine similarities (dot
/// products of unit vectors) to some benchmark record exceed the thresholds.
pub fn scan_embedding_leakage<T: Scalar>(
    train: &[EmbeddingRecord<T>],
    bench: &[EmbeddingRecord<T>],
    thresholds: &EmbeddingThresholds<T>,
) -> Result<BTreeSet<String>, DecontamError> {
    let mut dims = None;
    for rec in train.iter().chain(bench) {
        check_record(rec, &mut dims)?;
    }
    let flagged = train
        .iter()
        .filter(|t| {
            bench.iter().any(|b| {
                thresholds.flags(dot(&t.image_vec, &b.image_vec), dot(&t.text_vec, &b.text_vec))
            })
        })
        .map(|t| t.id.clone())
        .collect();
    Ok(flagged)
}

/// Writes the `KYEM1` container: magic, `image_dim: u32`, `text_dim: u32`,
/// `count: u64`, then per record a `u16`-prefixed UTF-8 id followed by the
/// image and text vectors as little-endian `f32`.
pub fn write_embeddings_bin<T: Scalar, W: Write>(
    records: &[EmbeddingRecord<T>],
    w: &mut W,
) -> Result<(), FormatError> {
    let (di, dt) = records
        .first()
        .map(|r| (r.image_vec.len(), r.text_vec.len()))
        .unwrap_or((0, 0));
    binio::write_all(w, EMBEDDING_MAGIC.as_bytes())?;
    binio::write_all(w, &(di as u32).to_le_bytes())?;
    binio::write_all(w, &(dt as u32).to_le_bytes())?;
    binio::write_all(w, &(records.len() as u64).to_le_bytes())?;
    for r in records {
        if r.image_vec.len() != di || r.text_vec.len() != dt {
            return Err(FormatError::Invalid(format!("record {:?} has inconsistent dimensions", r.id)));
        }
        binio::write_str16(w, &r.id)?;
        let mut buf = Vec::with_capacity((di + dt) * 4);
        for x in r.image_vec.iter().chain(&r.text_vec) {
            let f = x.to_f32().ok_or_else(|| FormatError::Invalid(format!("record {:?}: value not representable", r.id)))?;
            buf.extend_from_slice(&f.to_le_bytes());
        }
        binio::write_all(w, &buf)?;
    }
    Ok(())
}

pub fn read_embeddings_bin<T: Scalar, R: Read>(r: &mut R) -> Result<Vec<EmbeddingRecord<T>>, FormatError> {
    binio::expect_magic(r, EMBEDDING_MAGIC)?;
    let di = binio::read_u32(r, "image_dim")? as usize;
    let dt = binio::read_u32(r, "text_dim")? as usize;
    let count = binio::read_u64(r, "count")?;
    let mut out = Vec::new();
    for _ in 0..count {
        let id = binio::read_str16(r, "record id")?;
        let mut read_vec = |n: usize| -> Result<Vec<T>, FormatError> {
            (0..n)
                .map(|_| binio::read_f32(r, "embedding values").map(|f| T::lit(f64::from(f))))
                .collect()
        };
        let image_vec = read_vec(di)?;
        let text_vec = read_vec(dt)?;
        out.push(EmbeddingRecord { id, image_vec, text_vec });
    }
    binio::expect_eof(r)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, image: Vec<f64>, text: Vec<f64>) -> EmbeddingRecord<f64> {
        EmbeddingRecord {
            id: id.into(),
            image_vec: image,
            text_vec: text,
        }
    }

    /// Unit vector in the plane with cosine `c` to `[1, 0]`.
    fn at_cos(c: f64) -> Vec<f64> {
        vec![c, (1.0 - c * c).sqrt()]
    }

    #[test]
    fn identical_record_is_flagged() {
        let b = rec("b", at_cos(0.3), at_cos(0.7));
        let t = EmbeddingRecord { id: "t".into(), ..b.clone() };
        let f = scan_embedding_leakage(&[t], &[b], &EmbeddingThresholds::default()).unwrap();
        assert!(f.contains("t"));
    }

    #[test]
    fn and_semantics_requires_both() {
        let b = rec("b", vec![1.0, 0.0], vec![1.0, 0.0]);
        let t = rec("t", at_cos(0.99), at_cos(0.40));
        let th = EmbeddingThresholds::default();
        assert!(scan_embedding_leakage(&[t.clone()], &[b.clone()], &th).unwrap().is_empty());
        let or = EmbeddingThresholds { mode: ThresholdMode::Or, ..th };
        assert!(scan_embedding_leakage(&[t], &[b], &or).unwrap().contains("t"));
    }

    #[test]
    fn orthogonal_images_never_flag() {
        let b = rec("b", vec![1.0, 0.0], vec![1.0, 0.0]);
        let t = rec("t", vec![0.0, 1.0], vec![1.0, 0.0]);
        assert!(scan_embedding_leakage(&[t], &[b], &EmbeddingThresholds::default()).unwrap().is_empty());
    }

    #[test]
    fn non_unit_vectors_rejected() {
        let b = rec("b", vec![1.0, 0.0], vec![1.0, 0.0]);
        let t = rec("t", vec![1.01, 0.0], vec![1.0, 0.0]);
        let e = scan_embedding_leakage(&[t], &[b.clone()], &EmbeddingThresholds::default()).unwrap_err();
        assert!(matches!(e, DecontamError::Embedding { ref id, .. } if id == "t"));
        // within tolerance is fine
        let t = rec("t", vec![1.0005, 0.0], vec![1.0, 0.0]);
        assert!(scan_embedding_leakage(&[t], &[b], &EmbeddingThresholds::default()).is_ok());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let b = rec("b", vec![1.0, 0.0, 0.0], vec![1.0, 0.0]);
        let t = rec("t", vec![1.0, 0.0], vec![1.0, 0.0]);
        assert!(scan_embedding_leakage(&[t], &[b], &EmbeddingThresholds::default()).is_err());
    }

    #[test]
    fn binary_container_round_trip() {
        let recs = vec![
            rec("a", vec![0.6, 0.8], vec![1.0, 0.0, 0.0]),
            rec("β", vec![0.0, 1.0], vec![0.0, 0.0, 1.0]),
        ];
        let mut buf = Vec::new();
        write_embeddings_bin(&recs, &mut buf).unwrap();
        assert_eq!(&buf[..5], b"KYEM1");
        let back: Vec<EmbeddingRecord<f64>> = read_embeddings_bin(&mut buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].id, "β");
        assert_eq!(back[0].image_vec, vec![0.6f32 as f64, 0.8f32 as f64]);
        assert!(read_embeddings_bin::<f64, _>(&mut &buf[..buf.len() - 2]).is_err());
    }

    #[test]
    fn jsonl_shape() {
        let r: EmbeddingRecord<f32> =
            serde_json::from_str(r#"{"id":"x","image_vec":[1,0],"text_vec":[0,1]}"#).unwrap();
        assert_eq!(r.image_vec, vec![1.0, 0.0]);
    }
}
