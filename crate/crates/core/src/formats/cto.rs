//! Compressed tile offset (CTO) encoding.
//!
//! Each tile's kept row and column lists are stored as offsets from their
//! position: the `i`-th kept index is `i + offset[i]`, so kept rows
//! `(1, 2, 4)` become offsets `(1, 1, 2)`. Offset lists of all tiles are
//! padded with zeros to a common length and stored as one matrix; the
//! per-tile counts bound every read. Payloads are packed tile after tile,
//! each transposed (one original column per stored row).

use crate::error::{Error, Result};
use crate::mask::IndexMask;
use crate::matrix::{DenseMatrix, TileConfig};
use crate::patterns::{Tile, TileSparseMatrix};

/// Padding value in the offset matrices.
pub const PAD: u32 = 0;

/// A tile payload stored transposed: `width x kept_rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransposedTile(DenseMatrix);

impl TransposedTile {
    pub fn from_payload(payload: &DenseMatrix) -> Self {
        TransposedTile(payload.transpose())
    }

    pub fn from_transposed(data: DenseMatrix) -> Self {
        TransposedTile(data)
    }

    /// Back to the `kept_rows x width` orientation.
    pub fn to_payload(&self) -> DenseMatrix {
        self.0.transpose()
    }

    pub fn transpose(&self) -> TransposedTile {
        TransposedTile(self.0.transpose())
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtoEncoding {
    pub config: TileConfig,
    /// `(K, N)` of the unpruned weights.
    pub original_dims: (usize, usize),
    pub row_counts: Vec<u32>,
    pub col_counts: Vec<u32>,
    pub max_rows: usize,
    pub max_cols: usize,
    /// `tile_count x max_rows`, row-major, padded with [`PAD`].
    pub row_offsets: Vec<u32>,
    /// `tile_count x max_cols`, row-major, padded with [`PAD`].
    pub col_offsets: Vec<u32>,
    /// Transposed tile payloads, back to back.
    pub payload: Vec<f32>,
}

/// `kept[i] - i` for each position.
pub fn offsets_from_indices(kept: &[usize]) -> Vec<u32> {
    kept.iter()
        .enumerate()
        .map(|(i, &k)| (k - i) as u32)
        .collect()
}

/// `i + offsets[i]` for each position.
pub fn indices_from_offsets(offsets: &[u32]) -> Vec<usize> {
    offsets
        .iter()
        .enumerate()
        .map(|(i, &o)| i + o as usize)
        .collect()
}

pub fn encode_cto(t: &TileSparseMatrix) -> CtoEncoding {
    let tiles = t.tiles();
    let max_rows = tiles.iter().map(Tile::height).max().unwrap_or(0);
    let max_cols = tiles.iter().map(Tile::width).max().unwrap_or(0);
    let mut row_offsets = vec![PAD; tiles.len() * max_rows];
    let mut col_offsets = vec![PAD; tiles.len() * max_cols];
    let mut payload = Vec::with_capacity(t.stored_elements());
    for (i, tile) in tiles.iter().enumerate() {
        let ro = offsets_from_indices(tile.kept_rows.kept());
        row_offsets[i * max_rows..i * max_rows + ro.len()].copy_from_slice(&ro);
        let co = offsets_from_indices(t.tile_columns(i));
        col_offsets[i * max_cols..i * max_cols + co.len()].copy_from_slice(&co);
        payload.extend_from_slice(
            TransposedTile::from_payload(&tile.payload)
                .as_matrix()
                .data(),
        );
    }
    CtoEncoding {
        config: t.config(),
        original_dims: t.original_dims(),
        row_counts: tiles.iter().map(|x| x.height() as u32).collect(),
        col_counts: tiles.iter().map(|x| x.width() as u32).collect(),
        max_rows,
        max_cols,
        row_offsets,
        col_offsets,
        payload,
    }
}

/// Geometry of one tile inside a validated encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpan {
    pub rows: usize,
    pub cols: usize,
    /// Start of the tile's transposed payload.
    pub payload_start: usize,
    /// First condensed output column owned by the tile.
    pub out_col: usize,
}

impl CtoEncoding {
    pub fn tile_count(&self) -> usize {
        self.row_counts.len()
    }

    pub fn row_offsets_of(&self, t: usize) -> &[u32] {
        let n = self.row_counts[t] as usize;
        &self.row_offsets[t * self.max_rows..t * self.max_rows + n]
    }

    pub fn col_offsets_of(&self, t: usize) -> &[u32] {
        let n = self.col_counts[t] as usize;
        &self.col_offsets[t * self.max_cols..t * self.max_cols + n]
    }

    /// Kept columns across all tiles in condensed order.
    pub fn column_mask(&self) -> Result<IndexMask> {
        let mut kept = Vec::new();
        for t in 0..self.tile_count() {
            kept.extend(indices_from_offsets(self.col_offsets_of(t)));
        }
        IndexMask::new(self.original_dims.1, kept)
            .map_err(|e| Error::corrupt(format!("column offsets: {e}")))
    }

    /// Checks every structural invariant and returns the tile spans.
    pub fn validate(&self) -> Result<Vec<TileSpan>> {
        let (k, n) = self.original_dims;
        let g = self.config.granularity_g;
        let tiles = self.tile_count();
        if tiles == 0 {
            return Err(Error::corrupt("encoding has no tiles"));
        }
        if k == 0 || n == 0 || g == 0 || self.config.input_tile_t == 0 {
            return Err(Error::corrupt("zero dimension in encoding header"));
        }
        if self.col_counts.len() != tiles {
            return Err(Error::corrupt(
                "row and column count arrays differ in length",
            ));
        }
        if self.row_offsets.len() != tiles * self.max_rows
            || self.col_offsets.len() != tiles * self.max_cols
        {
            return Err(Error::corrupt(
                "offset matrix size does not match its header",
            ));
        }
        let mut spans = Vec::with_capacity(tiles);
        let mut payload_start = 0usize;
        let mut out_col = 0usize;
        let mut prev_col: Option<usize> = None;
        for t in 0..tiles {
            let rows = self.row_counts[t] as usize;
            let cols = self.col_counts[t] as usize;
            if rows == 0 || rows > self.max_rows || rows > k {
                return Err(Error::corrupt(format!(
                    "tile {t} has invalid row count {rows}"
                )));
            }
            if cols == 0 || cols > self.max_cols || cols > g {
                return Err(Error::corrupt(format!(
                    "tile {t} has invalid column count {cols}"
                )));
            }
            if t + 1 < tiles && cols != g {
                return Err(Error::corrupt(format!(
                    "tile {t} is {cols} wide but only the last tile may be narrower than {g}"
                )));
            }
            check_offsets(self.row_offsets_of(t), k, None)
                .map_err(|e| Error::corrupt(format!("tile {t} rows: {e}")))?;
            let last = check_offsets(self.col_offsets_of(t), n, prev_col)
                .map_err(|e| Error::corrupt(format!("tile {t} columns: {e}")))?;
            prev_col = Some(last);
            let pad_rows = &self.row_offsets[t * self.max_rows + rows..(t + 1) * self.max_rows];
            let pad_cols = &self.col_offsets[t * self.max_cols + cols..(t + 1) * self.max_cols];
            if pad_rows.iter().chain(pad_cols).any(|&p| p != PAD) {
                return Err(Error::corrupt(format!("tile {t} padding is not zero")));
            }
            spans.push(TileSpan {
                rows,
                cols,
                payload_start,
                out_col,
            });
            payload_start += rows * cols;
            out_col += cols;
        }
        if self.payload.len() != payload_start {
            return Err(Error::corrupt(format!(
                "payload holds {} values, tiles need {payload_start}",
                self.payload.len()
            )));
        }
        Ok(spans)
    }
}

/// Offsets must be non-decreasing (indices strictly increasing), decode
/// below `bound`, and start after `after`. Returns the last index.
fn check_offsets(
    offsets: &[u32],
    bound: usize,
    after: Option<usize>,
) -> std::result::Result<usize, String> {
    let mut prev = after;
    for (i, &o) in offsets.iter().enumerate() {
        let idx = i + o as usize;
        if idx >= bound {
            return Err(format!("index {idx} out of range {bound}"));
        }
        if prev.is_some_and(|p| idx <= p) {
            return Err(format!("index {idx} does not increase"));
        }
        prev = Some(idx);
    }
    prev.ok_or_else(|| "empty offset list".to_string())
}

pub fn decode_cto(c: &CtoEncoding) -> Result<TileSparseMatrix> {
    let spans = c.validate()?;
    let (k, _) = c.original_dims;
    let mut tiles = Vec::with_capacity(spans.len());
    for (t, span) in spans.iter().enumerate() {
        let kept = indices_from_offsets(c.row_offsets_of(t));
        let kept_rows = IndexMask::new(k, kept).map_err(|e| Error::corrupt(e.to_string()))?;
        let data =
            c.payload[span.payload_start..span.payload_start + span.rows * span.cols].to_vec();
        let tt = TransposedTile::from_transposed(DenseMatrix::new(span.cols, span.rows, data)?);
        tiles.push(Tile {
            kept_rows,
            payload: tt.to_payload(),
        });
    }
    TileSparseMatrix::new(c.config, c.column_mask()?, tiles, c.original_dims)
        .map_err(|e| Error::corrupt(e.to_string()))
}
