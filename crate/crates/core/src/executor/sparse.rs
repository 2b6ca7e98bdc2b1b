use super::{check_inner, GemmOutput};
use crate::error::{Error, Result};
use crate::formats::CtoEncoding;
use crate::mask::IndexMask;
use crate::matrix::DenseMatrix;
use crate::patterns::{SparseOverlay, Tile, TileSparseMatrix};

/// `M x width` product of one tile, row-major. Partial sums run over the
/// tile's kept rows in ascending order.
pub(crate) fn tile_product(a: &DenseMatrix, tile: &Tile) -> Vec<f64> {
    let m = a.rows();
    let width = tile.width();
    let rows = tile.kept_rows.kept();
    let mut out = vec![0.0f64; m * width];
    for i in 0..m {
        let a_row = a.row(i);
        let acc = &mut out[i * width..(i + 1) * width];
        for (p, &r) in rows.iter().enumerate() {
            let aik = f64::from(a_row[r]);
            for (c, &bv) in acc.iter_mut().zip(tile.payload.row(p)) {
                *c += aik * f64::from(bv);
            }
        }
    }
    out
}

/// Writes an `M x width` tile result into the condensed output.
pub(crate) fn scatter_tile(
    out: &mut DenseMatrix<f64>,
    first_col: usize,
    width: usize,
    vals: &[f64],
) {
    let n = out.cols();
    for (i, row) in vals.chunks_exact(width).enumerate() {
        out.data_mut()[i * n + first_col..i * n + first_col + width].copy_from_slice(row);
    }
}

/// Multiplies `a` by a tile-wise matrix, skipping pruned rows and columns.
pub fn gemm_tile_sparse(a: &DenseMatrix, b: &TileSparseMatrix) -> Result<GemmOutput> {
    check_inner(a, b.original_dims().0)?;
    let g = b.config().granularity_g;
    let mut condensed = DenseMatrix::<f64>::zeros(a.rows(), b.condensed_cols())?;
    for (t, tile) in b.tiles().iter().enumerate() {
        let vals = tile_product(a, tile);
        scatter_tile(&mut condensed, t * g, tile.width(), &vals);
    }
    Ok(GemmOutput {
        condensed,
        column_map: b.column_mask().clone(),
    })
}

/// Single pass over every tile of a CTO encoding. Row and column indices
/// are recovered as `position + offset`.
pub fn gemm_cto(a: &DenseMatrix, c: &CtoEncoding) -> Result<GemmOutput> {
    let spans = c.validate()?;
    check_inner(a, c.original_dims.0)?;
    let m = a.rows();
    let n_out: usize = spans.iter().map(|s| s.cols).sum();
    let mut condensed = DenseMatrix::<f64>::zeros(m, n_out)?;
    let mut kept_cols = Vec::with_capacity(n_out);
    for (t, span) in spans.iter().enumerate() {
        let row_off = c.row_offsets_of(t);
        let col_off = c.col_offsets_of(t);
        debug_assert_eq!(row_off.len(), span.rows);
        debug_assert_eq!(col_off.len(), span.cols);
        kept_cols.extend(col_off.iter().enumerate().map(|(j, &o)| j + o as usize));
        let payload = &c.payload[span.payload_start..span.payload_start + span.rows * span.cols];
        for i in 0..m {
            let a_row = a.row(i);
            for j in 0..span.cols {
                let column = &payload[j * span.rows..(j + 1) * span.rows];
                let mut acc = 0.0f64;
                for (p, (&o, &bv)) in row_off.iter().zip(column).enumerate() {
                    acc += f64::from(a_row[p + o as usize]) * f64::from(bv);
                }
                condensed.set(i, span.out_col + j, acc);
            }
        }
    }
    let column_map =
        IndexMask::new(c.original_dims.1, kept_cols).map_err(|e| Error::corrupt(e.to_string()))?;
    Ok(GemmOutput {
        condensed,
        column_map,
    })
}

/// Rejects overlays whose shape differs from the tile matrix or that store a
/// position the tile payloads already hold.
pub(crate) fn check_overlay(b: &TileSparseMatrix, ov: &SparseOverlay) -> Result<()> {
    if ov.dims != b.original_dims() {
        return Err(Error::invalid(format!(
            "overlay is {:?} but weights are {:?}",
            ov.dims,
            b.original_dims()
        )));
    }
    ov.validate()?;
    let owners = b.column_owner_rows();
    for (r, c, _) in ov.entries() {
        if owners[c].is_some_and(|rows| rows.contains(r)) {
            return Err(Error::contract(format!(
                "overlay entry ({r}, {c}) overlaps a tile payload position"
            )));
        }
    }
    Ok(())
}

/// Adds `a * overlay` to a tile-path result in the original column space.
/// The column map grows to include every column the overlay touches.
pub(crate) fn add_overlay(
    a: &DenseMatrix,
    base: &GemmOutput,
    ov: &SparseOverlay,
) -> Result<GemmOutput> {
    let mut full = base.expand();
    let n = full.cols();
    for (c, col) in ov.columns.iter().enumerate() {
        for (&r, &v) in col.rows.iter().zip(&col.values) {
            let v = f64::from(v);
            for i in 0..a.rows() {
                full.data_mut()[i * n + c] += f64::from(a.get(i, r)) * v;
            }
        }
    }
    let mut flags = base.column_map.keep_flags();
    for c in ov.occupied_columns() {
        flags[c] = true;
    }
    let column_map = IndexMask::from_keep_flags(&flags);
    let condensed = full.apply_column_mask(&column_map)?;
    Ok(GemmOutput {
        condensed,
        column_map,
    })
}

/// Tile-wise product plus the product with the restored overlay, summed in
/// the original column space.
pub fn gemm_tew(a: &DenseMatrix, b: &TileSparseMatrix, ov: &SparseOverlay) -> Result<GemmOutput> {
    check_overlay(b, ov)?;
    let base = gemm_tile_sparse(a, b)?;
    add_overlay(a, &base, ov)
}
