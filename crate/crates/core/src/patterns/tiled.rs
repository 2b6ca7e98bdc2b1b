use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{ElementMask, IndexMask};
use crate::matrix::{DenseMatrix, TileConfig};

/// One condensed tile: the K-indices it keeps and the surviving values.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub kept_rows: IndexMask,
    /// `kept_rows.len() x width` values.
    pub payload: DenseMatrix,
}

impl Tile {
    pub fn width(&self) -> usize {
        self.payload.cols()
    }

    pub fn height(&self) -> usize {
        self.payload.rows()
    }
}

/// Tile-wise pruned weights.
///
/// The surviving columns (`column_mask`) are packed side by side and cut
/// into tiles of `config.granularity_g` columns; only the last tile may be
/// narrower. Each tile keeps its own subset of the K rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TileSparseMatrix {
    config: TileConfig,
    column_mask: IndexMask,
    tiles: Vec<Tile>,
    original_dims: (usize, usize),
}

impl TileSparseMatrix {
    pub fn new(
        config: TileConfig,
        column_mask: IndexMask,
        tiles: Vec<Tile>,
        original_dims: (usize, usize),
    ) -> Result<Self> {
        let (k, n) = original_dims;
        if column_mask.domain_len() != n {
            return Err(Error::invalid(format!(
                "column mask covers {} columns, matrix has {n}",
                column_mask.domain_len()
            )));
        }
        if column_mask.is_empty() {
            return Err(Error::invalid("tile matrix keeps no columns"));
        }
        let g = config.granularity_g;
        let n_kept = column_mask.len();
        let expected_tiles = n_kept.div_ceil(g);
        if tiles.len() != expected_tiles {
            return Err(Error::invalid(format!(
                "{} tiles for {n_kept} kept columns at G={g}, expected {expected_tiles}",
                tiles.len()
            )));
        }
        for (t, tile) in tiles.iter().enumerate() {
            let width = g.min(n_kept - t * g);
            if tile.width() != width {
                return Err(Error::invalid(format!(
                    "tile {t} is {} wide, expected {width}",
                    tile.width()
                )));
            }
            if tile.kept_rows.domain_len() != k {
                return Err(Error::invalid(format!(
                    "tile {t} row mask covers {} rows, matrix has {k}",
                    tile.kept_rows.domain_len()
                )));
            }
            if tile.height() != tile.kept_rows.len() {
                return Err(Error::invalid(format!(
                    "tile {t} payload has {} rows but keeps {}",
                    tile.height(),
                    tile.kept_rows.len()
                )));
            }
        }
        Ok(Self {
            config,
            column_mask,
            tiles,
            original_dims,
        })
    }

    /// Gathers tile payloads out of `w` for the given column and row masks.
    pub fn from_weights(
        w: &DenseMatrix,
        config: TileConfig,
        column_mask: IndexMask,
        tile_rows: Vec<IndexMask>,
    ) -> Result<Self> {
        let g = config.granularity_g;
        let mut tiles = Vec::with_capacity(tile_rows.len());
        for (t, kept_rows) in tile_rows.into_iter().enumerate() {
            let start = t * g;
            if start >= column_mask.len() {
                return Err(Error::invalid("more row masks than tiles"));
            }
            let cols = &column_mask.kept()[start..(start + g).min(column_mask.len())];
            if kept_rows.is_empty() {
                return Err(Error::invalid(format!("tile {t} keeps no rows")));
            }
            let payload = DenseMatrix::from_fn(kept_rows.len(), cols.len(), |i, j| {
                w.get(kept_rows.kept()[i], cols[j])
            })?;
            tiles.push(Tile { kept_rows, payload });
        }
        Self::new(config, column_mask, tiles, w.dims())
    }

    pub fn config(&self) -> TileConfig {
        self.config
    }

    pub fn column_mask(&self) -> &IndexMask {
        &self.column_mask
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub(crate) fn tiles_mut(&mut self) -> &mut [Tile] {
        &mut self.tiles
    }

    pub fn original_dims(&self) -> (usize, usize) {
        self.original_dims
    }

    /// Number of surviving columns, `N'`.
    pub fn condensed_cols(&self) -> usize {
        self.column_mask.len()
    }

    /// Original column indices covered by tile `t`.
    pub fn tile_columns(&self, t: usize) -> &[usize] {
        let g = self.config.granularity_g;
        let start = t * g;
        &self.column_mask.kept()[start..(start + g).min(self.column_mask.len())]
    }

    /// Values stored in tile payloads (including explicit zeros).
    pub fn stored_elements(&self) -> usize {
        self.tiles.iter().map(|t| t.height() * t.width()).sum()
    }

    /// Dense `K x N` matrix with payload values at their original positions
    /// and zeros elsewhere.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (k, n) = self.original_dims;
        let mut out = DenseMatrix::zeros(k, n).expect("dims validated at construction");
        for (t, tile) in self.tiles.iter().enumerate() {
            let cols = self.tile_columns(t);
            for (i, &r) in tile.kept_rows.kept().iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    out.set(r, c, tile.payload.get(i, j));
                }
            }
        }
        out
    }

    /// Positions covered by tile payloads.
    pub fn structural_mask(&self) -> ElementMask {
        let (k, n) = self.original_dims;
        let mut mask = ElementMask::from_flags(k, n, vec![false; k * n]).unwrap();
        for (t, tile) in self.tiles.iter().enumerate() {
            for &r in tile.kept_rows.kept() {
                for &c in self.tile_columns(t) {
                    mask.set(r, c, true);
                }
            }
        }
        mask
    }

    /// For each original column, the kept K-indices of the tile that owns
    /// it, or `None` for pruned columns.
    pub(crate) fn column_owner_rows(&self) -> Vec<Option<&IndexMask>> {
        let mut owners = vec![None; self.original_dims.1];
        for (t, tile) in self.tiles.iter().enumerate() {
            for &c in self.tile_columns(t) {
                owners[c] = Some(&tile.kept_rows);
            }
        }
        owners
    }
}

/// Sorted rows and values of one overlay column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlayColumn {
    pub rows: Vec<usize>,
    pub values: Vec<f32>,
}

/// Column-compressed elements restored on top of a tile-wise matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseOverlay {
    pub dims: (usize, usize),
    pub columns: Vec<OverlayColumn>,
}

impl SparseOverlay {
    pub fn empty(dims: (usize, usize)) -> Self {
        Self {
            dims,
            columns: vec![OverlayColumn::default(); dims.1],
        }
    }

    /// Builds an overlay from arbitrary-order `(row, col, value)` entries.
    pub fn from_entries(
        dims: (usize, usize),
        entries: impl IntoIterator<Item = (usize, usize, f32)>,
    ) -> Result<Self> {
        let mut buckets: Vec<Vec<(usize, f32)>> = vec![Vec::new(); dims.1];
        for (r, c, v) in entries {
            if r >= dims.0 || c >= dims.1 {
                return Err(Error::invalid(format!(
                    "overlay entry ({r}, {c}) outside {}x{}",
                    dims.0, dims.1
                )));
            }
            buckets[c].push((r, v));
        }
        let mut columns = Vec::with_capacity(dims.1);
        for mut b in buckets {
            b.sort_by_key(|&(r, _)| r);
            if b.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid("duplicate overlay entry"));
            }
            columns.push(OverlayColumn {
                rows: b.iter().map(|&(r, _)| r).collect(),
                values: b.iter().map(|&(_, v)| v).collect(),
            });
        }
        Ok(Self { dims, columns })
    }

    /// Checks column count, sorted unique rows and bounds.
    pub fn validate(&self) -> Result<()> {
        if self.columns.len() != self.dims.1 {
            return Err(Error::invalid(format!(
                "overlay has {} columns, dims say {}",
                self.columns.len(),
                self.dims.1
            )));
        }
        for (c, col) in self.columns.iter().enumerate() {
            if col.rows.len() != col.values.len() {
                return Err(Error::invalid(format!(
                    "overlay column {c} has mismatched rows and values"
                )));
            }
            if col.rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "overlay column {c} rows are not strictly increasing"
                )));
            }
            if col.rows.last().is_some_and(|&r| r >= self.dims.0) {
                return Err(Error::invalid(format!(
                    "overlay column {c} row out of range"
                )));
            }
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.rows.len()).sum()
    }

    /// `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f32)> + '_ {
        self.columns.iter().enumerate().flat_map(|(c, col)| {
            col.rows
                .iter()
                .zip(&col.values)
                .map(move |(&r, &v)| (r, c, v))
        })
    }

    /// Columns holding at least one entry.
    pub fn occupied_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, col)| !col.rows.is_empty())
            .map(|(c, _)| c)
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dims.0, self.dims.1).expect("overlay dims");
        for (r, c, v) in self.entries() {
            out.set(r, c, v);
        }
        out
    }
}
