use super::BudgetError;
use crate::scalar::Scalar;

pub const DEFAULT_ROPE_BASE: f64 = 10000.0;

/// 2D rotary embedding of one feature vector at grid cell `(row, col)`.
///
/// The vector is read as `d / 2` adjacent pairs `(v[2j], v[2j+1])`. Pairs
/// `0 .. d/4` rotate by `row * base^(-2k / (d/2))`, pairs `d/4 .. d/2` by the
/// same frequencies applied to `col`.
pub fn rope2d_rotate<T: Scalar>(vec: &[T], row: i64, col: i64, base: T) -> Result<Vec<T>, BudgetError> {
    let d = vec.len();
    if d == 0 || d % 4 != 0 {
        return Err(BudgetError::RopeLength(d));
    }
    let quarter = d / 4;
    let half = T::lit((d / 2) as f64);
    let mut out = vec.to_vec();
    for (axis, pos) in [(0usize, row), (1usize, col)] {
        let pos = T::lit(pos as f64);
        for k in 0..quarter {
            let inv_freq = base.powf(-T::lit((2 * k) as f64) / half);
            let (sin, cos) = (pos * inv_freq).sin_cos();
            let j = axis * quarter + k;
            let (a, b) = (vec[2 * j], vec[2 * j + 1]);
            out[2 * j] = a * cos - b * sin;
            out[2 * j + 1] = a * sin + b * cos;
        }
    }
    Ok(out)
}
