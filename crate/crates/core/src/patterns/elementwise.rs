use serde::{Deserialize, Serialize};

use super::{check_sparsity, Pattern, PrunePlan};
use crate::budget;
use crate::error::{Error, Result};
use crate::mask::ElementMask;
use crate::matrix::DenseMatrix;
use crate::scoring::{group_element_scores, score_elements, ScoreProvider};
use crate::select::{select_lowest, select_prune_units};

/// Kept positions of one vector running down a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorKeep {
    /// Owning tile for vectors inside tile payloads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile: Option<usize>,
    pub column: usize,
    pub start: usize,
    pub len: usize,
    /// Offsets within the vector, ascending.
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VwMeta {
    pub vector_len: usize,
    /// Survivors in every complete vector.
    pub keep_per_vector: usize,
    pub vectors: Vec<VectorKeep>,
}

/// Element-wise pruning: the globally lowest `floor(s_t * K * N)` elements.
pub fn prune_ew(w: &DenseMatrix, s_t: f64, p: &ScoreProvider) -> Result<PrunePlan> {
    check_sparsity(s_t, "EW")?;
    let scores = score_elements(w, p)?;
    let pairs: Vec<(usize, f64)> = scores.data().iter().copied().enumerate().collect();
    let sel = select_prune_units(&pairs, s_t)?;
    let mut keep = vec![true; pairs.len()];
    for id in sel.pruned_by_rank() {
        keep[id] = false;
    }
    let mask = ElementMask::from_flags(w.rows(), w.cols(), keep)?;
    Ok(PrunePlan::new(Pattern::Ew, s_t, mask))
}

/// Prunes the lowest `floor(s * len)` entries of one vector, ties by
/// position. Returns kept offsets.
pub(crate) fn vector_keep(scores: &[f64], s: f64) -> Result<Vec<usize>> {
    let pairs: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    let sel = select_lowest(&pairs, budget(s, scores.len()))?;
    let pruned = sel.pruned();
    Ok((0..scores.len())
        .filter(|i| pruned.binary_search(i).is_err())
        .collect())
}

/// Vector-wise (N:M) pruning with vectors of `vector_len` running along K.
///
/// Each vector independently loses its `floor(s_t * len)` lowest-scored
/// elements; with `vector_len = 4, s_t = 0.5` this is the 2:4 pattern.
pub fn prune_vw(
    w: &DenseMatrix,
    s_t: f64,
    vector_len: usize,
    p: &ScoreProvider,
) -> Result<(PrunePlan, VwMeta)> {
    check_sparsity(s_t, "VW")?;
    if vector_len < 2 {
        return Err(Error::invalid(format!(
            "vector length must be at least 2, got {vector_len}"
        )));
    }
    let scores = score_elements(w, p)?;
    let (k, n) = w.dims();
    let mut mask = ElementMask::all_kept(k, n);
    let mut vectors = Vec::new();
    let mut column_scores = Vec::with_capacity(vector_len);
    for c in 0..n {
        for start in (0..k).step_by(vector_len) {
            let len = vector_len.min(k - start);
            column_scores.clear();
            column_scores.extend((start..start + len).map(|r| scores.get(r, c)));
            let kept = vector_keep(&column_scores, s_t)?;
            let mut flags = vec![false; len];
            for &o in &kept {
                flags[o] = true;
            }
            for (o, &keep) in flags.iter().enumerate() {
                if !keep {
                    mask.set(start + o, c, false);
                }
            }
            vectors.push(VectorKeep {
                tile: None,
                column: c,
                start,
                len,
                kept,
            });
        }
    }
    let meta = VwMeta {
        vector_len,
        keep_per_vector: vector_len - budget(s_t, vector_len),
        vectors,
    };
    Ok((PrunePlan::new(Pattern::Vw, s_t, mask), meta))
}

/// Block-wise pruning: `block x block` units (ragged at the edges), the
/// lowest `floor(s_t * blocks)` of which are zeroed.
pub fn prune_bw(w: &DenseMatrix, s_t: f64, block: usize, p: &ScoreProvider) -> Result<PrunePlan> {
    check_sparsity(s_t, "BW")?;
    if block == 0 {
        return Err(Error::invalid("block size must be positive"));
    }
    let (k, n) = w.dims();
    // a block larger than the matrix is a single unit
    let unit = (block.min(k), block.min(n));
    let groups = group_element_scores(&score_elements(w, p)?, unit)?;
    let sel = select_prune_units(&groups.as_pairs(), s_t)?;
    let mut mask = ElementMask::all_kept(k, n);
    for id in sel.pruned_by_rank() {
        let (rows, cols) = groups.unit_bounds(id, k, n);
        for r in rows {
            for c in cols.clone() {
                mask.set(r, c, false);
            }
        }
    }
    Ok(PrunePlan::new(Pattern::Bw, s_t, mask))
}
