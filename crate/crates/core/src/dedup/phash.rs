//! DCT perceptual hash over a luminance matrix.
//!
//! The image is bilinearly resampled to 32x32 (pixel-center aligned), a 2D
//! DCT-II is evaluated for the 8x8 lowest-frequency block, and each of the 64
//! coefficients becomes one bit: set iff it strictly exceeds the median of the
//! 63 AC coefficients. Bit `i` is coefficient `i` in row-major order over the
//! block, so bit 0 (the least significant) is the DC term.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DedupError;
use crate::scalar::Scalar;

pub const RESAMPLE_SIDE: usize = 32;
pub const BLOCK_SIDE: usize = 8;

/// Row-major luminance values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> LumaMatrix<T> {
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self, DedupError> {
        if rows == 0 || cols == 0 {
            return Err(DedupError::InvalidInput(format!(
                "luma matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(DedupError::InvalidInput(format!(
                "luma matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values
            .iter()
            .position(|v| !v.is_finite() || *v < T::zero() || *v > T::one())
        {
            return Err(DedupError::InvalidInput(format!(
                "luma value at index {pos} is {} (must be finite and in [0, 1])",
                values[pos]
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, DedupError> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.cols + col]
    }

    /// Bilinear resample with pixel-center alignment, edge-clamped.
    pub fn resize_bilinear(&self, out_rows: usize, out_cols: usize) -> Result<Self, DedupError> {
        if out_rows == 0 || out_cols == 0 {
            return Err(DedupError::InvalidInput(format!(
                "resize target must be at least 1x1, got {out_rows}x{out_cols}"
            )));
        }
        let ys = axis_taps::<T>(self.rows, out_rows);
        let xs = axis_taps::<T>(self.cols, out_cols);
        let mut values = Vec::with_capacity(out_rows * out_cols);
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = self.get(y0, x0) * (T::one() - fx) + self.get(y0, x1) * fx;
                let bottom = self.get(y1, x0) * (T::one() - fx) + self.get(y1, x1) * fx;
                let v = top * (T::one() - fy) + bottom * fy;
                // convex weights keep v in range up to rounding
                values.push(v.max(T::zero()).min(T::one()));
            }
        }
        Ok(Self {
            rows: out_rows,
            cols: out_cols,
            values,
        })
    }
}

fn axis_taps<T: Scalar>(src: usize, dst: usize) -> Vec<(usize, usize, T)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let pos = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = pos.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, T::lit(pos - i0 as f64))
        })
        .collect()
}

/// 64-bit perceptual hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PHash64(pub u64);

impl PHash64 {
    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn hamming(self, other: PHash64) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    pub fn to_hex(self) -> String {
        format!("{:016x}", self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 16 {
            return None;
        }
        u64::from_str_radix(s, 16).ok().map(PHash64)
    }
}

impl fmt::Display for PHash64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Resamples `image` to the 32x32 grid the hash is defined on.
pub fn resample_for_hash<T: Scalar>(image: &LumaMatrix<T>) -> LumaMatrix<T> {
    image
        .resize_bilinear(RESAMPLE_SIDE, RESAMPLE_SIDE)
        .expect("constant non-zero target dims")
}

pub fn compute_phash<T: Scalar>(image: &LumaMatrix<T>) -> PHash64 {
    let resampled = resample_for_hash(image);
    hash_resampled(resampled.values())
}

/// Hash of an already-resampled 32x32 row-major grid.
pub fn hash_resampled<T: Scalar>(grid: &[T]) -> PHash64 {
    assert_eq!(grid.len(), RESAMPLE_SIDE * RESAMPLE_SIDE);
    let coeffs = low_frequency_dct(grid);

    let mut ac: Vec<T> = coeffs[1..].to_vec();
    ac.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
    let median = ac[ac.len() / 2];

    let bits = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > median)
        .fold(0u64, |acc, (i, _)| acc | (1u64 << i));
    PHash64(bits)
}

/// Unnormalized DCT-II coefficients `(u, v)`, `u, v < 8`, row-major.
///
/// `C(u, v) = sum_y sum_x m[y][x] cos(pi (2x+1) v / 64) cos(pi (2y+1) u / 64)`.
/// Coefficients whose magnitude is within accumulated rounding of zero are
/// snapped to exactly zero so flat regions hash stably.
pub fn low_frequency_dct<T: Scalar>(grid: &[T]) -> [T; BLOCK_SIDE * BLOCK_SIDE] {
    const N: usize = RESAMPLE_SIDE;
    const K: usize = BLOCK_SIDE;
    let mut basis = [[T::zero(); N]; K];
    for (k, row) in basis.iter_mut().enumerate() {
        for (n, b) in row.iter_mut().enumerate() {
            *b = T::lit((PI * (2 * n + 1) as f64 * k as f64 / (2 * N) as f64).cos());
        }
    }

    // rows first: partial[y][v] = sum_x m[y][x] basis[v][x]
    let mut partial = [[T::zero(); K]; N];
    for (y, out) in partial.iter_mut().enumerate() {
        let row = &grid[y * N..(y + 1) * N];
        for (v, o) in out.iter_mut().enumerate() {
            *o = crate::scalar::dot(row, &basis[v]);
        }
    }

    let tol = T::epsilon() * T::lit(4096.0);
    let mut coeffs = [T::zero(); K * K];
    for u in 0..K {
        for v in 0..K {
            let c = (0..N).fold(T::zero(), |acc, y| acc + partial[y][v] * basis[u][y]);
            coeffs[u * K + v] = if c.abs() <= tol { T::zero() } else { c };
        }
    }
    coeffs
}
