//! GEMM executors: dense reference, per-tile sparse, fused CTO, TEW split
//! execution and batched multi-worker execution.
//!
//! All paths accumulate in `f64`. Within a tile, partial sums are formed in
//! ascending kept-row order, so the tile, CTO and batched paths produce
//! bit-identical results for the same tile matrix.

mod batched;
mod dense;
mod sparse;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::IndexMask;
use crate::matrix::DenseMatrix;

pub use batched::{
    assign_tiles, execute_batched, execute_batched_tew, execute_batched_with, BatchTrace, Strategy,
};
pub use dense::{gemm_dense, gemm_dense_blocked};
pub use sparse::{gemm_cto, gemm_tew, gemm_tile_sparse};

/// Product restricted to surviving output columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GemmOutput {
    /// `M x N'` values for the columns in `column_map`, in order.
    pub condensed: DenseMatrix<f64>,
    pub column_map: IndexMask,
}

impl GemmOutput {
    /// Full `M x N` result with zero columns at pruned positions.
    pub fn expand(&self) -> DenseMatrix<f64> {
        let m = self.condensed.rows();
        let mut out = DenseMatrix::zeros(m, self.column_map.domain_len()).expect("nonempty dims");
        for i in 0..m {
            let row = self.condensed.row(i);
            for (j, &c) in self.column_map.kept().iter().enumerate() {
                out.set(i, c, row[j]);
            }
        }
        out
    }

    /// Bitwise equality of values and column maps.
    pub fn bit_identical(&self, other: &GemmOutput) -> bool {
        self.column_map == other.column_map
            && self.condensed.dims() == other.condensed.dims()
            && self
                .condensed
                .data()
                .iter()
                .zip(other.condensed.data())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Difference between a computed product and its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    /// `max |actual - expected| / max |expected|`, or the absolute error
    /// when the reference is all zeros.
    pub max_relative_error: f64,
    /// First row-major position whose values differ at all.
    pub first_difference: Option<(usize, usize)>,
    /// Position of the largest absolute error.
    pub worst: Option<(usize, usize)>,
}

pub fn compare(actual: &DenseMatrix<f64>, expected: &DenseMatrix<f64>) -> Result<Comparison> {
    if actual.dims() != expected.dims() {
        return Err(Error::invalid(format!(
            "cannot compare {:?} with {:?}",
            actual.dims(),
            expected.dims()
        )));
    }
    let scale = expected.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cols = expected.cols();
    let mut max_abs = 0.0f64;
    let mut worst = None;
    let mut first = None;
    for (i, (&a, &e)) in actual.data().iter().zip(expected.data()).enumerate() {
        let d = (a - e).abs();
        if a != e && first.is_none() {
            first = Some((i / cols, i % cols));
        }
        if d > max_abs || d.is_nan() {
            max_abs = if d.is_nan() { f64::INFINITY } else { d };
            worst = Some((i / cols, i % cols));
        }
    }
    let max_relative_error = if scale > 0.0 {
        max_abs / scale
    } else {
        max_abs
    };
    Ok(Comparison {
        max_relative_error,
        first_difference: first,
        worst,
    })
}

pub(crate) fn check_inner(a: &DenseMatrix, k: usize) -> Result<()> {
    if a.cols() != k {
        return Err(Error::invalid(format!(
            "activation has {} columns but weights have K={k}",
            a.cols()
        )));
    }
    Ok(())
}
