//! Tile-wise pruning and its two hybrids.
//!
//! TW runs two passes at the same per-dimension sparsity
//! `s = 1 - sqrt(1 - s_t)`: full-height columns are ranked globally and the
//! survivors condensed (TW-C), then the condensed matrix is cut into
//! width-`G` tiles whose `(1, G)` row segments are ranked jointly across all
//! tiles (TW-R). TEW over-prunes with TW and restores the best pruned
//! elements into a sparse overlay; TVW runs TW at `1 - 2(1 - s_t)` and
//! finishes with 2:4 inside every tile payload.

use super::elementwise::vector_keep;
use super::{
    check_sparsity, Clamp, ClampUnit, Pattern, PrunePlan, SparseOverlay, TileSparseMatrix,
    TileSummary, TwSplit, VectorKeep, VwMeta,
};
use crate::budget;
use crate::error::{Error, Result};
use crate::mask::{ElementMask, IndexMask};
use crate::matrix::{DenseMatrix, TileConfig};
use crate::scoring::{score_elements, ScoreProvider};
use crate::select::{select_lowest, select_prune_units};

const TWO_FOUR_LEN: usize = 4;
const TWO_FOUR_SPARSITY: f64 = 0.5;

/// Per-dimension sparsity for a TW target: `1 - sqrt(1 - s_t)`.
pub fn tw_per_dimension(s_t: f64) -> f64 {
    1.0 - (1.0 - s_t).sqrt()
}

/// Sparsity the TW stage of TVW runs at: `1 - 2 (1 - s_t)`.
pub fn tvw_tile_share(s_t: f64) -> f64 {
    1.0 - 2.0 * (1.0 - s_t)
}

#[derive(Debug, Clone)]
pub struct TwResult {
    pub plan: PrunePlan,
    pub tiles: TileSparseMatrix,
}

#[derive(Debug, Clone)]
pub struct TewResult {
    pub plan: PrunePlan,
    pub tiles: TileSparseMatrix,
    pub overlay: SparseOverlay,
}

#[derive(Debug, Clone)]
pub struct TvwResult {
    pub plan: PrunePlan,
    pub tiles: TileSparseMatrix,
    pub vw: VwMeta,
}

/// Sum of element scores down each full-height column.
pub(crate) fn column_scores(elem: &DenseMatrix<f64>) -> Vec<f64> {
    let mut out = vec![0.0; elem.cols()];
    for r in 0..elem.rows() {
        for (acc, &s) in out.iter_mut().zip(elem.row(r)) {
            *acc += s;
        }
    }
    out
}

/// Column survivors after pruning `ranked_pruned` (lowest score first).
/// If every column would go, the last-ranked one is kept.
pub(crate) fn condense_columns(n: usize, ranked_pruned: &[usize]) -> (IndexMask, Option<Clamp>) {
    let mut keep = vec![true; n];
    let mut clamp = None;
    let effective = if ranked_pruned.len() >= n {
        clamp = Some(Clamp {
            unit: ClampUnit::Columns,
            requested: ranked_pruned.len(),
            applied: n - 1,
        });
        &ranked_pruned[..n - 1]
    } else {
        ranked_pruned
    };
    for &c in effective {
        keep[c] = false;
    }
    (IndexMask::from_keep_flags(&keep), clamp)
}

/// Scores of the `(1, G)` row segments of the condensed matrix. Segment ids
/// are tile-major: `tile * K + row`.
///
/// Segments of a narrower last tile are scaled by `G / width` so they rank
/// on the same footing as full-width ones; full-width scores are plain sums.
pub(crate) fn segment_scores(
    elem: &DenseMatrix<f64>,
    column_mask: &IndexMask,
    g: usize,
) -> Vec<f64> {
    let k = elem.rows();
    let kept = column_mask.kept();
    let tiles = kept.len().div_ceil(g);
    let mut out = vec![0.0; tiles * k];
    for r in 0..k {
        let row = elem.row(r);
        for (pos, &c) in kept.iter().enumerate() {
            out[(pos / g) * k + r] += row[c];
        }
    }
    let last_width = kept.len() - (tiles - 1) * g;
    if last_width < g {
        let scale = g as f64 / last_width as f64;
        for v in &mut out[(tiles - 1) * k..] {
            *v *= scale;
        }
    }
    out
}

/// Per-tile kept rows after pruning the segments in `ranked_pruned` (lowest
/// score first). A tile that would lose every row keeps its last-ranked
/// segment, and the shortfall is reported.
pub(crate) fn tile_rows_from_pruned(
    k: usize,
    tiles: usize,
    ranked_pruned: &[usize],
) -> (Vec<IndexMask>, Vec<Clamp>) {
    let mut keep = vec![true; tiles * k];
    let mut pruned_per_tile = vec![0usize; tiles];
    let mut last_in_tile = vec![None; tiles];
    for &id in ranked_pruned {
        keep[id] = false;
        pruned_per_tile[id / k] += 1;
        last_in_tile[id / k] = Some(id);
    }
    let mut clamps = Vec::new();
    for t in 0..tiles {
        if pruned_per_tile[t] == k {
            let id = last_in_tile[t].expect("tile had pruned segments");
            keep[id] = true;
            clamps.push(Clamp {
                unit: ClampUnit::TileRows { tile: t },
                requested: k,
                applied: k - 1,
            });
        }
    }
    let rows = keep.chunks(k).map(IndexMask::from_keep_flags).collect();
    (rows, clamps)
}

pub(crate) fn assemble_tw(
    w: &DenseMatrix,
    config: TileConfig,
    column_mask: IndexMask,
    tile_rows: Vec<IndexMask>,
) -> Result<TileSparseMatrix> {
    TileSparseMatrix::from_weights(w, config, column_mask, tile_rows)
}

fn tile_summaries(tiles: &TileSparseMatrix) -> Vec<TileSummary> {
    tiles
        .tiles()
        .iter()
        .map(|t| TileSummary {
            width: t.width(),
            kept_rows: t.height(),
        })
        .collect()
}

pub(crate) fn summarize_tw(
    pattern: Pattern,
    target: f64,
    tw_target: f64,
    tiles: &TileSparseMatrix,
    clamps: Vec<Clamp>,
    mask: ElementMask,
) -> PrunePlan {
    let (k, n) = tiles.original_dims();
    let split = TwSplit {
        tw_target,
        per_dimension: tw_per_dimension(tw_target),
        columns_total: n,
        columns_pruned: n - tiles.condensed_cols(),
        segments_total: tiles.tiles().len() * k,
        segments_pruned: tiles.tiles().iter().map(|t| k - t.height()).sum(),
    };
    let mut plan = PrunePlan::new(pattern, target, mask);
    plan.split = Some(split);
    plan.clamps = clamps;
    plan.tiles = tile_summaries(tiles);
    plan
}

/// Both TW passes on precomputed element scores.
fn tw_core(
    w: &DenseMatrix,
    elem: &DenseMatrix<f64>,
    tw_target: f64,
    config: TileConfig,
) -> Result<(TileSparseMatrix, Vec<Clamp>)> {
    let s = tw_per_dimension(tw_target);
    let (k, n) = w.dims();

    let cols: Vec<(usize, f64)> = column_scores(elem).into_iter().enumerate().collect();
    let col_sel = select_prune_units(&cols, s)?;
    let ranked: Vec<usize> = col_sel.pruned_by_rank().collect();
    let (column_mask, col_clamp) = condense_columns(n, &ranked);

    let g = config.granularity_g;
    let segs: Vec<(usize, f64)> = segment_scores(elem, &column_mask, g)
        .into_iter()
        .enumerate()
        .collect();
    let seg_sel = select_prune_units(&segs, s)?;
    let ranked: Vec<usize> = seg_sel.pruned_by_rank().collect();
    let tiles = column_mask.len().div_ceil(g);
    let (tile_rows, mut clamps) = tile_rows_from_pruned(k, tiles, &ranked);
    if let Some(c) = col_clamp {
        clamps.insert(0, c);
    }
    Ok((assemble_tw(w, config, column_mask, tile_rows)?, clamps))
}

/// Tile-wise pruning of a `K x N` matrix at tile width `g`.
pub fn prune_tw(w: &DenseMatrix, s_t: f64, g: usize, p: &ScoreProvider) -> Result<TwResult> {
    check_sparsity(s_t, "TW")?;
    let config = TileConfig::with_granularity(g)?;
    let elem = score_elements(w, p)?;
    let (tiles, clamps) = tw_core(w, &elem, s_t, config)?;
    let mask = tiles.structural_mask();
    let plan = summarize_tw(Pattern::Tw, s_t, s_t, &tiles, clamps, mask);
    Ok(TwResult { plan, tiles })
}

/// Restores the `count` highest-scored elements pruned by `tw_mask`, ties
/// by ascending row-major position. `elem` holds scores of the weights
/// before TW ran.
pub(crate) fn restore_overlay(
    w: &DenseMatrix,
    elem: &DenseMatrix<f64>,
    tw_mask: &ElementMask,
    count: usize,
) -> Result<(SparseOverlay, ElementMask)> {
    let pruned: Vec<(usize, f64)> = tw_mask
        .flags()
        .iter()
        .enumerate()
        .filter(|(_, &k)| !k)
        .map(|(i, _)| (i, -elem.data()[i]))
        .collect();
    let mut mask = tw_mask.clone();
    if pruned.is_empty() || count == 0 {
        return Ok((SparseOverlay::empty(w.dims()), mask));
    }
    let sel = select_lowest(&pruned, count.min(pruned.len()))?;
    let cols = w.cols();
    let entries: Vec<(usize, usize, f32)> = sel
        .pruned()
        .into_iter()
        .map(|i| (i / cols, i % cols, w.data()[i]))
        .collect();
    for &(r, c, _) in &entries {
        mask.set(r, c, true);
    }
    Ok((SparseOverlay::from_entries(w.dims(), entries)?, mask))
}

/// Tile-wise pruning at `s_t + delta` followed by restoring
/// `floor(delta * K * N)` of the best pruned elements as an overlay.
pub fn prune_tew(
    w: &DenseMatrix,
    s_t: f64,
    delta: f64,
    g: usize,
    p: &ScoreProvider,
) -> Result<TewResult> {
    check_sparsity(s_t, "TEW")?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    let over = s_t + delta;
    if over >= 1.0 {
        return Err(Error::invalid(format!(
            "TEW needs s_t + delta < 1, got {s_t} + {delta}"
        )));
    }
    let config = TileConfig::with_granularity(g)?;
    let elem = score_elements(w, p)?;
    let (tiles, clamps) = tw_core(w, &elem, over, config)?;
    let tw_mask = tiles.structural_mask();
    let restore = budget(delta, w.rows() * w.cols());
    let (overlay, mask) = restore_overlay(w, &elem, &tw_mask, restore)?;
    let mut plan = summarize_tw(Pattern::Tew, s_t, over, &tiles, clamps, mask);
    plan.delta = Some(delta);
    plan.restored = Some(overlay.nnz());
    Ok(TewResult {
        plan,
        tiles,
        overlay,
    })
}

/// 2:4 pruning along K inside every tile payload, scored with the
/// original-shape element scores gathered onto the payload.
pub(crate) fn apply_two_four(
    tiles: &mut TileSparseMatrix,
    elem: &DenseMatrix<f64>,
    mask: &mut ElementMask,
) -> Result<VwMeta> {
    let columns: Vec<Vec<usize>> = (0..tiles.tiles().len())
        .map(|t| tiles.tile_columns(t).to_vec())
        .collect();
    let mut vectors = Vec::new();
    let mut buf = Vec::with_capacity(TWO_FOUR_LEN);
    for (t, tile) in tiles.tiles_mut().iter_mut().enumerate() {
        let rows = tile.kept_rows.kept().to_vec();
        for (j, &c) in columns[t].iter().enumerate() {
            for start in (0..rows.len()).step_by(TWO_FOUR_LEN) {
                let len = TWO_FOUR_LEN.min(rows.len() - start);
                buf.clear();
                buf.extend((start..start + len).map(|i| elem.get(rows[i], c)));
                let kept = vector_keep(&buf, TWO_FOUR_SPARSITY)?;
                for o in 0..len {
                    if kept.binary_search(&o).is_err() {
                        tile.payload.set(start + o, j, 0.0);
                        mask.set(rows[start + o], c, false);
                    }
                }
                vectors.push(VectorKeep {
                    tile: Some(t),
                    column: j,
                    start,
                    len,
                    kept,
                });
            }
        }
    }
    Ok(VwMeta {
        vector_len: TWO_FOUR_LEN,
        keep_per_vector: TWO_FOUR_LEN - budget(TWO_FOUR_SPARSITY, TWO_FOUR_LEN),
        vectors,
    })
}

/// Tile-wise pruning at `1 - 2(1 - s_t)` composed with 2:4 inside the tiles.
pub fn prune_tvw(w: &DenseMatrix, s_t: f64, g: usize, p: &ScoreProvider) -> Result<TvwResult> {
    if !(0.5..1.0).contains(&s_t) {
        return Err(Error::invalid(format!(
            "TVW sparsity must lie in [0.5, 1) because the 2:4 stage always removes half, got {s_t}"
        )));
    }
    let config = TileConfig::with_granularity(g)?;
    let elem = score_elements(w, p)?;
    let share = tvw_tile_share(s_t);
    let (mut tiles, clamps) = tw_core(w, &elem, share, config)?;
    let mut mask = tiles.structural_mask();
    let vw = apply_two_four(&mut tiles, &elem, &mut mask)?;
    let plan = summarize_tw(Pattern::Tvw, s_t, share, &tiles, clamps, mask);
    Ok(TvwResult { plan, tiles, vw })
}
