//! Row-major dense matrices and tile geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::IndexMask;

/// Row-major dense matrix with explicit dimensions.
///
/// Weights and activations are stored as `f32`; GEMM outputs use `f64`
/// because every executor accumulates in 64 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T = f32> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![T::default(); rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Keeps only the columns listed in `mask`, preserving their order.
    pub fn apply_column_mask(&self, mask: &IndexMask) -> Result<Self> {
        if mask.domain_len() != self.cols {
            return Err(Error::invalid(format!(
                "column mask covers {} columns but matrix has {}",
                mask.domain_len(),
                self.cols
            )));
        }
        if mask.is_empty() {
            return Err(Error::invalid("column mask keeps no columns"));
        }
        let kept = mask.kept();
        let mut data = Vec::with_capacity(self.rows * kept.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(kept.iter().map(|&c| row[c]));
        }
        Self::new(self.rows, kept.len(), data)
    }

    /// Keeps only the rows listed in `mask`, preserving their order.
    pub fn apply_row_mask(&self, mask: &IndexMask) -> Result<Self> {
        if mask.domain_len() != self.rows {
            return Err(Error::invalid(format!(
                "row mask covers {} rows but matrix has {}",
                mask.domain_len(),
                self.rows
            )));
        }
        if mask.is_empty() {
            return Err(Error::invalid("row mask keeps no rows"));
        }
        let mut data = Vec::with_capacity(mask.len() * self.cols);
        for &r in mask.kept() {
            data.extend_from_slice(self.row(r));
        }
        Self::new(mask.len(), self.cols, data)
    }
}

impl DenseMatrix<f32> {
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn to_f64(&self) -> DenseMatrix<f64> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt()
    }
}

/// Tiling parameters: `granularity_g` is the tile width along N and
/// `input_tile_t` the number of activation rows blocked together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileConfig {
    pub granularity_g: usize,
    pub input_tile_t: usize,
}

impl TileConfig {
    pub fn new(granularity_g: usize, input_tile_t: usize) -> Result<Self> {
        if granularity_g == 0 || input_tile_t == 0 {
            return Err(Error::invalid(format!(
                "tile sizes must be positive, got G={granularity_g} T={input_tile_t}"
            )));
        }
        Ok(Self {
            granularity_g,
            input_tile_t,
        })
    }

    /// Tile of width `g` with the default activation blocking.
    pub fn with_granularity(g: usize) -> Result<Self> {
        Self::new(g, 32)
    }

    /// Number of tiles covering `n` columns.
    pub fn tile_count(&self, n: usize) -> usize {
        n.div_ceil(self.granularity_g)
    }
}

impl Default for TileConfig {
    fn default() -> Self {
        Self {
            granularity_g: 32,
            input_tile_t: 32,
        }
    }
}
