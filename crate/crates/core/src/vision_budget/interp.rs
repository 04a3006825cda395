use std::io::{Read, Write};

use super::BudgetError;
use crate::binio::{self, FormatError};
use crate::scalar::Scalar;

/// `rows x cols` grid of `dim`-wide position embeddings, row-major with the
/// channel innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct PosEmbedGrid<T> {
    rows: usize,
    cols: usize,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> PosEmbedGrid<T> {
    pub fn new(rows: usize, cols: usize, dim: usize, values: Vec<T>) -> Result<Self, BudgetError> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(BudgetError::Grid(format!("dimensions must be >= 1, got {rows}x{cols}x{dim}")));
        }
        if values.len() != rows * cols * dim {
            return Err(BudgetError::Grid(format!(
                "{rows}x{cols}x{dim} grid needs {} values, got {}",
                rows * cols * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BudgetError::Grid("non-finite value".into()));
        }
        Ok(Self { rows, cols, dim, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, row: usize, col: usize) -> &[T] {
        let start = (row * self.cols + col) * self.dim;
        &self.values[start..start + self.dim]
    }

    /// Header `rows, cols, dim` as `u32`, then the values as `f32`, all
    /// little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), FormatError> {
        for n in [self.rows, self.cols, self.dim] {
            let n = u32::try_from(n).map_err(|_| FormatError::Invalid("dimension exceeds u32".into()))?;
            binio::write_all(w, &n.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            let f = v.to_f32().ok_or_else(|| FormatError::Invalid("value not representable as f32".into()))?;
            buf.extend_from_slice(&f.to_le_bytes());
        }
        binio::write_all(w, &buf)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let rows = binio::read_u32(r, "rows")? as usize;
        let cols = binio::read_u32(r, "cols")? as usize;
        let dim = binio::read_u32(r, "dim")? as usize;
        let n = rows
            .checked_mul(cols)
            .and_then(|x| x.checked_mul(dim))
            .ok_or_else(|| FormatError::Invalid("grid size overflows".into()))?;
        let values = (0..n)
            .map(|_| binio::read_f32(r, "grid values").map(|f| T::lit(f64::from(f))))
            .collect::<Result<Vec<_>, _>>()?;
        binio::expect_eof(r)?;
        Self::new(rows, cols, dim, values).map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

fn corner_taps<T: Scalar>(src: usize, dst: usize) -> Vec<(usize, usize, T)> {
    (0..dst)
        .map(|d| {
            if src == 1 || dst == 1 {
                return (0, 0, T::zero());
            }
            // exact rational position d * (src-1) / (dst-1)
            let num = d * (src - 1);
            let den = dst - 1;
            let i0 = (num / den).min(src - 1);
            let frac = T::lit((num % den) as f64) / T::lit(den as f64);
            (i0, (i0 + 1).min(src - 1), frac)
        })
        .collect()
}

/// Channel-wise bilinear resampling with corner alignment: the four corner
/// vectors of the source land unchanged on the corners of the target.
pub fn interpolate_pos_embed<T: Scalar>(
    grid: &PosEmbedGrid<T>,
    target_rows: usize,
    target_cols: usize,
) -> Result<PosEmbedGrid<T>, BudgetError> {
    if target_rows == 0 || target_cols == 0 {
        return Err(BudgetError::Grid(format!("target must be >= 1x1, got {target_rows}x{target_cols}")));
    }
    let ys = corner_taps::<T>(grid.rows, target_rows);
    let xs = corner_taps::<T>(grid.cols, target_cols);
    let mut values = Vec::with_capacity(target_rows * target_cols * grid.dim);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let (a, b, c, d) = (grid.at(y0, x0), grid.at(y0, x1), grid.at(y1, x0), grid.at(y1, x1));
            for ch in 0..grid.dim {
                let top = a[ch] + (b[ch] - a[ch]) * fx;
                let bottom = c[ch] + (d[ch] - c[ch]) * fx;
                values.push(top + (bottom - top) * fy);
            }
        }
    }
    PosEmbedGrid::new(target_rows, target_cols, grid.dim, values)
}
