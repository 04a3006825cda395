use super::DecontamError;
use crate::scalar::Scalar;

pub const DEFAULT_PAIR_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairFilter {
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
}

/// Keeps pairs whose precomputed score strictly exceeds `threshold`,
/// preserving input order on both sides. The score is treated as an opaque
/// scalar.
pub fn filter_pair_score<T: Scalar>(
    records: &[(String, T)],
    threshold: T,
) -> Result<PairFilter, DecontamError> {
    let mut out = PairFilter::default();
    for (id, score) in records {
        if !score.is_finite() {
            return Err(DecontamError::NonFiniteScore { id: id.clone() });
        }
        if *score > threshold {
            out.kept.push(id.clone());
        } else {
            out.dropped.push(id.clone());
        }
    }
    Ok(out)
}
