//! Weight-space averaging of structurally identical checkpoints, plus a flat
//! binary container for parameter maps.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use thiserror::Error;

use crate::binio::{self, FormatError};
use crate::scalar::Scalar;

pub const PARAM_MAGIC: &str = "KYPM1";
const DTYPE_F32: u8 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub shape: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    /// A rank-0 shape holds one value.
    pub fn new(shape: Vec<usize>, values: Vec<T>) -> Result<Self, MergeError> {
        let want = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if want != Some(values.len()) {
            return Err(MergeError::Shape(format!("shape {shape:?} does not hold {} values", values.len())));
        }
        Ok(Self { shape, values })
    }

    pub fn vector(values: Vec<T>) -> Self {
        Self { shape: vec![values.len()], values }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamMap<T> {
    pub entries: BTreeMap<String, Tensor<T>>,
}

impl<T: Scalar> ParamMap<T> {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Option<Tensor<T>> {
        self.entries.insert(name.into(), tensor)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Header magic and `u64` entry count; per entry a `u16`-prefixed name,
    /// dtype tag `u8` (0 = f32), rank `u8`, `u64` dims, then f32 values. All
    /// little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), FormatError> {
        binio::write_all(w, PARAM_MAGIC.as_bytes())?;
        binio::write_all(w, &(self.entries.len() as u64).to_le_bytes())?;
        for (name, t) in &self.entries {
            binio::write_str16(w, name)?;
            let rank = u8::try_from(t.shape.len())
                .map_err(|_| FormatError::Invalid(format!("{name}: rank above 255")))?;
            binio::write_all(w, &[DTYPE_F32, rank])?;
            for &d in &t.shape {
                binio::write_all(w, &(d as u64).to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(t.values.len() * 4);
            for v in &t.values {
                let f = v.to_f32().ok_or_else(|| FormatError::Invalid(format!("{name}: value not f32")))?;
                buf.extend_from_slice(&f.to_le_bytes());
            }
            binio::write_all(w, &buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, FormatError> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        binio::expect_magic(r, PARAM_MAGIC)?;
        let count = binio::read_u64(r, "entry count")?;
        let mut map = Self::new();
        for _ in 0..count {
            let name = binio::read_str16(r, "parameter name")?;
            let dtype = binio::read_u8(r, "dtype")?;
            if dtype != DTYPE_F32 {
                return Err(FormatError::Invalid(format!("{name}: unsupported dtype tag {dtype}")));
            }
            let rank = binio::read_u8(r, "rank")?;
            let shape = (0..rank)
                .map(|_| {
                    binio::read_u64(r, "dims").and_then(|d| {
                        usize::try_from(d).map_err(|_| FormatError::Invalid(format!("dimension {d} too large")))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| FormatError::Invalid(format!("{name}: element count overflows")))?;
            let mut raw = Vec::new();
            r.take(n as u64 * 4).read_to_end(&mut raw).map_err(FormatError::Io)?;
            if raw.len() != n * 4 {
                return Err(FormatError::Truncated { what: "tensor values" });
            }
            let values = raw
                .chunks_exact(4)
                .map(|c| T::lit(f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))))
                .collect();
            if map.insert(name.clone(), Tensor { shape, values }).is_some() {
                return Err(FormatError::Invalid(format!("duplicate parameter {name:?}")));
            }
        }
        binio::expect_eof(r)?;
        Ok(map)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        Self::read_from(&mut &bytes[..])
    }
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("no models to merge")]
    NoModels,
    #[error("parameter names differ from model 0: only in model 0 {only_first:?}, only in model {model} {only_other:?}")]
    NameMismatch { model: usize, only_first: Vec<String>, only_other: Vec<String> },
    #[error("parameter {name:?}: shape {found:?} in model {model} differs from {expected:?}")]
    ShapeMismatch { name: String, model: usize, expected: Vec<usize>, found: Vec<usize> },
    #[error("{0}")]
    Shape(String),
    #[error("parameter {name:?} in model {model} holds a non-finite value")]
    NonFinite { name: String, model: usize },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn check_structure<T: Scalar>(models: &[ParamMap<T>]) -> Result<(), MergeError> {
    let first = &models[0];
    for (k, m) in models.iter().enumerate() {
        let a: BTreeSet<&String> = first.entries.keys().collect();
        let b: BTreeSet<&String> = m.entries.keys().collect();
        if a != b {
            return Err(MergeError::NameMismatch {
                model: k,
                only_first: a.difference(&b).map(|s| s.to_string()).collect(),
                only_other: b.difference(&a).map(|s| s.to_string()).collect(),
            });
        }
        for (name, t) in &m.entries {
            let expected = &first.entries[name].shape;
            if &t.shape != expected {
                return Err(MergeError::ShapeMismatch {
                    name: name.clone(),
                    model: k,
                    expected: expected.clone(),
                    found: t.shape.clone(),
                });
            }
            let want = t.shape.iter().product::<usize>();
            if t.values.len() != want {
                return Err(MergeError::Shape(format!("parameter {name:?} in model {k}: shape {:?} does not hold {} values", t.shape, t.values.len())));
            }
            if t.values.iter().any(|v| !v.is_finite()) {
                return Err(MergeError::NonFinite { name: name.clone(), model: k });
            }
        }
    }
    Ok(())
}

fn normalized_weights<T: Scalar>(n: usize, weights: Option<&[T]>) -> Result<Vec<f64>, MergeError> {
    let Some(w) = weights else {
        return Ok(vec![1.0 / n as f64; n]);
    };
    if w.len() != n {
        return Err(MergeError::Weights(format!("{} weights for {n} models", w.len())));
    }
    let w: Vec<f64> = w.iter().map(|v| v.as_f64()).collect();
    if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(MergeError::Weights("weights must be finite and >= 0".into()));
    }
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(MergeError::Weights("weights must sum to a positive finite value".into()));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Per-parameter convex combination. Weights default to uniform and are
/// normalized to sum 1. Each output is clamped into the `[min, max]` of the
/// positively weighted inputs so rounding cannot leave the convex hull.
pub fn merge_average<T: Scalar>(models: &[ParamMap<T>], weights: Option<&[T]>) -> Result<ParamMap<T>, MergeError> {
    if models.is_empty() {
        return Err(MergeError::NoModels);
    }
    check_structure(models)?;
    let w = normalized_weights(models.len(), weights)?;
    let live: Vec<(usize, f64)> = w.iter().copied().enumerate().filter(|&(_, wi)| wi > 0.0).collect();
    let mut out = ParamMap::new();
    for (name, first) in &models[0].entries {
        let values = (0..first.values.len())
            .map(|e| {
                let mut sum = 0.0f64;
                let mut comp = 0.0f64;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &(k, wi) in &live {
                    let x = models[k].entries[name].values[e].as_f64();
                    lo = lo.min(x);
                    hi = hi.max(x);
                    // Neumaier summation keeps the result independent of model order
                    // to well below f32 resolution.
                    let term = wi * x;
                    let t = sum + term;
                    comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
                    sum = t;
                }
                T::lit((sum + comp).clamp(lo, hi))
            })
            .collect();
        out.insert(name.clone(), Tensor { shape: first.shape.clone(), values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: f64) -> ParamMap<f64> {
        let mut m = ParamMap::new();
        m.insert("w", Tensor::vector(vec![v]));
        m
    }

    #[test]
    fn uniform_mean() {
        let out = merge_average(&[single(2.0), single(4.0)], None).unwrap();
        assert_eq!(out.get("w").unwrap().values, vec![3.0]);
    }

    #[test]
    fn weighted_combination() {
        let out = merge_average(&[single(0.0), single(8.0)], Some(&[0.25, 0.75])).unwrap();
        assert_eq!(out.get("w").unwrap().values, vec![6.0]);
        let out = merge_average(&[single(0.0), single(8.0)], Some(&[1.0, 3.0])).unwrap();
        assert_eq!(out.get("w").unwrap().values, vec![6.0]);
    }

    #[test]
    fn identical_models_are_fixed_points() {
        let mut m = ParamMap::new();
        m.insert("a", Tensor::new(vec![2, 2], vec![0.1f32, -3.5, 7.25, 1e-3]).unwrap());
        m.insert("b", Tensor::new(vec![], vec![42.0f32]).unwrap());
        let out = merge_average(&[m.clone(), m.clone(), m.clone()], None).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn structural_errors() {
        let mut other = single(1.0);
        other.insert("extra", Tensor::vector(vec![1.0]));
        match merge_average(&[single(1.0), other], None) {
            Err(MergeError::NameMismatch { model: 1, only_first, only_other }) => {
                assert!(only_first.is_empty());
                assert_eq!(only_other, vec!["extra"]);
            }
            e => panic!("{e:?}"),
        }
        let mut wide = ParamMap::new();
        wide.insert("w", Tensor::vector(vec![1.0, 2.0]));
        assert!(matches!(merge_average(&[single(1.0), wide], None), Err(MergeError::ShapeMismatch { .. })));
        assert!(matches!(merge_average(&[single(1.0), single(f64::NAN)], None), Err(MergeError::NonFinite { model: 1, .. })));
        assert!(matches!(merge_average::<f64>(&[], None), Err(MergeError::NoModels)));
        assert!(matches!(merge_average(&[single(1.0)], Some(&[-1.0])), Err(MergeError::Weights(_))));
        assert!(matches!(merge_average(&[single(1.0)], Some(&[0.0])), Err(MergeError::Weights(_))));
        assert!(matches!(merge_average(&[single(1.0)], Some(&[1.0, 1.0])), Err(MergeError::Weights(_))));
    }

    #[test]
    fn container_round_trip() {
        let mut m = ParamMap::new();
        m.insert("layer.0.weight", Tensor::new(vec![2, 3], vec![1.0f32, 2.0, 3.0, -4.0, 0.5, 0.0]).unwrap());
        m.insert("scalar", Tensor::new(vec![], vec![9.0f32]).unwrap());
        m.insert("empty", Tensor::new(vec![0, 4], vec![]).unwrap());
        let bytes = m.to_bytes().unwrap();
        assert_eq!(&bytes[..5], b"KYPM1");
        assert_eq!(ParamMap::<f32>::from_bytes(&bytes).unwrap(), m);
        assert!(matches!(ParamMap::<f32>::from_bytes(&bytes[..bytes.len() - 2]), Err(FormatError::Truncated { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(ParamMap::<f32>::from_bytes(&bad), Err(FormatError::BadMagic { .. })));
    }
}
