//! Pruning patterns.
//!
//! Every pattern maps a weight matrix and a target sparsity to a
//! [`PrunePlan`]; the tile-based patterns additionally return the condensed
//! [`TileSparseMatrix`] (and, for TEW, a [`SparseOverlay`]).

mod elementwise;
mod tiled;
mod tilewise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::ElementMask;

pub use elementwise::{prune_bw, prune_ew, prune_vw, VectorKeep, VwMeta};
pub use tiled::{OverlayColumn, SparseOverlay, Tile, TileSparseMatrix};
pub use tilewise::{
    prune_tew, prune_tvw, prune_tw, tvw_tile_share, tw_per_dimension, TewResult, TvwResult,
    TwResult,
};

pub(crate) use tilewise::{
    apply_two_four, assemble_tw, column_scores, condense_columns, restore_overlay, segment_scores,
    summarize_tw, tile_rows_from_pruned,
};

pub const PLAN_SCHEMA: &str = "plan-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Ew,
    Vw,
    Bw,
    Tw,
    Tew,
    Tvw,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::Ew,
        Pattern::Vw,
        Pattern::Bw,
        Pattern::Tw,
        Pattern::Tew,
        Pattern::Tvw,
    ];

    /// Patterns whose output is a condensed tile matrix.
    pub fn is_tiled(self) -> bool {
        matches!(self, Pattern::Tw | Pattern::Tew | Pattern::Tvw)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pattern::Ew => "ew",
            Pattern::Vw => "vw",
            Pattern::Bw => "bw",
            Pattern::Tw => "tw",
            Pattern::Tew => "tew",
            Pattern::Tvw => "tvw",
        };
        f.write_str(s)
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ew" => Ok(Pattern::Ew),
            "vw" => Ok(Pattern::Vw),
            "bw" => Ok(Pattern::Bw),
            "tw" => Ok(Pattern::Tw),
            "tew" => Ok(Pattern::Tew),
            "tvw" => Ok(Pattern::Tvw),
            other => Err(Error::invalid(format!("unknown pattern `{other}`"))),
        }
    }
}

/// Which minimum-keep rule stopped part of a budget from being applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "unit", rename_all = "snake_case")]
pub enum ClampUnit {
    /// The matrix must keep at least one column.
    Columns,
    /// Tile `tile` must keep at least one row segment.
    TileRows { tile: usize },
}

/// A budget that could not be met in full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clamp {
    #[serde(flatten)]
    pub unit: ClampUnit,
    pub requested: usize,
    pub applied: usize,
}

/// How a tile-wise target was split between column and row pruning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwSplit {
    /// Sparsity the TW stage ran at (the overall target for plain TW).
    pub tw_target: f64,
    /// Per-dimension sparsity `1 - sqrt(1 - tw_target)`.
    pub per_dimension: f64,
    pub columns_total: usize,
    pub columns_pruned: usize,
    pub segments_total: usize,
    pub segments_pruned: usize,
}

/// Kept-row count and width of one tile, as recorded in the plan document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSummary {
    pub width: usize,
    pub kept_rows: usize,
}

/// Result of pruning one matrix with one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunePlan {
    pub schema: String,
    pub pattern: Pattern,
    pub target_sparsity: f64,
    pub achieved_sparsity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<TwSplit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restored: Option<usize>,
    #[serde(default)]
    pub clamps: Vec<Clamp>,
    #[serde(default)]
    pub tiles: Vec<TileSummary>,
    pub element_mask: ElementMask,
}

impl PrunePlan {
    pub(crate) fn new(pattern: Pattern, target_sparsity: f64, element_mask: ElementMask) -> Self {
        Self {
            schema: PLAN_SCHEMA.to_string(),
            pattern,
            target_sparsity,
            achieved_sparsity: element_mask.sparsity(),
            delta: None,
            split: None,
            restored: None,
            clamps: Vec::new(),
            tiles: Vec::new(),
            element_mask,
        }
    }

    /// Replaces the mask and recomputes the achieved sparsity from it.
    pub fn set_mask(&mut self, mask: ElementMask) {
        self.achieved_sparsity = mask.sparsity();
        self.element_mask = mask;
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let plan: PrunePlan = serde_json::from_str(s)?;
        if plan.schema != PLAN_SCHEMA {
            return Err(Error::invalid(format!(
                "unsupported plan schema `{}`",
                plan.schema
            )));
        }
        Ok(plan)
    }
}

pub(crate) fn check_sparsity(s: f64, what: &str) -> Result<()> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::invalid(format!(
            "{what} sparsity must lie in [0, 1), got {s}"
        )));
    }
    Ok(())
}
