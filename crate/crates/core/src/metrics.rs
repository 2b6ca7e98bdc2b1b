//! Sparsity, FLOP, memory and load-balance accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{Pattern, PrunePlan, SparseOverlay, TileSparseMatrix};

pub const REPORT_SCHEMA: &str = "report-v1";

/// How the pruned weights are represented for accounting.
#[derive(Debug, Clone, Copy)]
pub enum Representation<'a> {
    Tiled {
        tiles: &'a TileSparseMatrix,
        overlay: Option<&'a SparseOverlay>,
    },
    /// Unstructured masks; FLOPs are grouped into width-`g` column tiles.
    Masked { g: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub target: f64,
    pub achieved: f64,
    pub dense_flops: u64,
    pub sparse_flops: u64,
}

/// Byte counts with 4-byte values and 4-byte indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub dense_bytes: u64,
    pub payload_bytes: u64,
    /// CTO counts and padded offset matrices (tiled), or CSC indices (masked).
    pub index_bytes: u64,
    /// Per-tile row and column mask vectors with one 4-byte flag per entry.
    /// Only defined for tiled representations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitmask_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub schema: String,
    pub pattern: Pattern,
    pub target: f64,
    pub achieved: f64,
    pub m: usize,
    pub layers: Vec<LayerReport>,
    /// `2 * M * N * K` summed over layers.
    pub dense_flops: u64,
    /// `2 * M * (kept weights)`: tile payload positions the mask keeps plus
    /// overlay entries.
    pub sparse_flops: u64,
    /// `2 * M * (stored payload values + overlay entries)`, the work done by
    /// this crate's executors. Differs from `sparse_flops` only when
    /// payloads hold explicit zeros (the 2:4 stage of TVW).
    pub executed_flops: u64,
    pub flop_reduction: f64,
    pub per_tile_flops: Vec<u64>,
    /// Max over mean of `per_tile_flops`.
    pub imbalance: f64,
    pub memory: MemoryReport,
}

impl SparsityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct LayerAccount {
    layer: LayerReport,
    executed_flops: u64,
    per_tile_flops: Vec<u64>,
    memory: MemoryReport,
}

fn account(
    name: &str,
    plan: &PrunePlan,
    repr: Representation<'_>,
    m: usize,
) -> Result<LayerAccount> {
    let mask = &plan.element_mask;
    let (k, n) = mask.dims();
    let m64 = m as u64;
    let dense_flops = 2 * m64 * k as u64 * n as u64;
    let dense_bytes = 4 * (k * n) as u64;

    let (sparse_flops, executed_flops, per_tile_flops, memory) = match repr {
        Representation::Tiled { tiles, overlay } => {
            if tiles.original_dims() != (k, n) {
                return Err(Error::invalid(
                    "tile matrix and plan disagree on dimensions",
                ));
            }
            let mut per_tile = Vec::with_capacity(tiles.tiles().len());
            for (t, tile) in tiles.tiles().iter().enumerate() {
                let cols = tiles.tile_columns(t);
                let kept = tile
                    .kept_rows
                    .kept()
                    .iter()
                    .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
                    .filter(|&(r, c)| mask.is_kept(r, c))
                    .count() as u64;
                per_tile.push(2 * m64 * kept);
            }
            let ov_nnz = overlay.map_or(0, |o| o.nnz()) as u64;
            let stored = tiles.stored_elements() as u64;
            let p = tiles.tiles().len() as u64;
            let max_rows = tiles.tiles().iter().map(|t| t.height()).max().unwrap_or(0) as u64;
            let max_cols = tiles.tiles().iter().map(|t| t.width()).max().unwrap_or(0) as u64;
            let overlay_index = if ov_nnz > 0 {
                4 * (ov_nnz + n as u64 + 1)
            } else {
                0
            };
            let memory = MemoryReport {
                dense_bytes,
                payload_bytes: 4 * (stored + ov_nnz),
                index_bytes: 4 * p * (2 + max_rows + max_cols) + overlay_index,
                bitmask_bytes: Some(
                    4 * tiles
                        .tiles()
                        .iter()
                        .map(|t| (k + t.width()) as u64)
                        .sum::<u64>(),
                ),
            };
            let sparse = per_tile.iter().sum::<u64>() + 2 * m64 * ov_nnz;
            let executed = 2 * m64 * (stored + ov_nnz);
            (sparse, executed, per_tile, memory)
        }
        Representation::Masked { g } => {
            if g == 0 {
                return Err(Error::invalid("tile width must be positive"));
            }
            let mut per_tile = vec![0u64; n.div_ceil(g)];
            for r in 0..k {
                for c in 0..n {
                    if mask.is_kept(r, c) {
                        per_tile[c / g] += 2 * m64;
                    }
                }
            }
            let nnz = mask.kept_count() as u64;
            let memory = MemoryReport {
                dense_bytes,
                payload_bytes: 4 * nnz,
                index_bytes: 4 * (nnz + n as u64 + 1),
                bitmask_bytes: None,
            };
            let sparse = 2 * m64 * nnz;
            (sparse, sparse, per_tile, memory)
        }
    };

    Ok(LayerAccount {
        layer: LayerReport {
            name: name.to_string(),
            k,
            n,
            target: plan.target_sparsity,
            achieved: plan.achieved_sparsity,
            dense_flops,
            sparse_flops,
        },
        executed_flops,
        per_tile_flops,
        memory,
    })
}

pub fn imbalance(loads: &[u64]) -> f64 {
    let total: u64 = loads.iter().sum();
    if loads.is_empty() || total == 0 {
        return 1.0;
    }
    *loads.iter().max().unwrap() as f64 / (total as f64 / loads.len() as f64)
}

/// Report for a single pruned matrix multiplied by `m` activation rows.
pub fn report(plan: &PrunePlan, repr: Representation<'_>, m: usize) -> Result<SparsityReport> {
    report_layers(&[("weights", plan, repr)], m)
}

/// Report aggregated over several layers sharing the activation row count.
pub fn report_layers(
    layers: &[(&str, &PrunePlan, Representation<'_>)],
    m: usize,
) -> Result<SparsityReport> {
    let first = layers
        .first()
        .ok_or_else(|| Error::invalid("report needs at least one layer"))?;
    if m == 0 {
        return Err(Error::invalid("activation row count must be positive"));
    }
    let mut accounts = Vec::with_capacity(layers.len());
    for (name, plan, repr) in layers {
        accounts.push(account(name, plan, *repr, m)?);
    }
    let dense_flops: u64 = accounts.iter().map(|a| a.layer.dense_flops).sum();
    let sparse_flops: u64 = accounts.iter().map(|a| a.layer.sparse_flops).sum();
    let executed_flops: u64 = accounts.iter().map(|a| a.executed_flops).sum();
    let per_tile_flops: Vec<u64> = accounts
        .iter()
        .flat_map(|a| a.per_tile_flops.iter().copied())
        .collect();
    let total: usize = layers.iter().map(|(_, p, _)| p.element_mask.total()).sum();
    let pruned: usize = layers
        .iter()
        .map(|(_, p, _)| p.element_mask.pruned_count())
        .sum();
    let sum_opt = |f: fn(&MemoryReport) -> Option<u64>| -> Option<u64> {
        accounts.iter().map(|a| f(&a.memory)).sum()
    };
    let memory = MemoryReport {
        dense_bytes: accounts.iter().map(|a| a.memory.dense_bytes).sum(),
        payload_bytes: accounts.iter().map(|a| a.memory.payload_bytes).sum(),
        index_bytes: accounts.iter().map(|a| a.memory.index_bytes).sum(),
        bitmask_bytes: sum_opt(|m| m.bitmask_bytes),
    };
    Ok(SparsityReport {
        schema: REPORT_SCHEMA.to_string(),
        pattern: first.1.pattern,
        target: first.1.target_sparsity,
        achieved: pruned as f64 / total as f64,
        m,
        imbalance: imbalance(&per_tile_flops),
        layers: accounts.into_iter().map(|a| a.layer).collect(),
        dense_flops,
        sparse_flops,
        executed_flops,
        flop_reduction: 1.0 - sparse_flops as f64 / dense_flops as f64,
        per_tile_flops,
        memory,
    })
}

/// Bytes for unpadded CTO offsets versus per-tile flag vectors, both with
/// 4-byte entries. Helper for comparing the two index forms tile by tile.
pub fn index_vs_mask_bytes(tiles: &TileSparseMatrix) -> Vec<(u64, u64)> {
    let k = tiles.original_dims().0 as u64;
    tiles
        .tiles()
        .iter()
        .map(|t| {
            let offsets = 4 * (t.height() + t.width()) as u64;
            let mask = 4 * (k + t.width() as u64);
            (offsets, mask)
        })
        .collect()
}
