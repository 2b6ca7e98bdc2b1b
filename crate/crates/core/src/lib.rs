//! Tile-wise sparsity for GEMM-shaped weight matrices.
//!
//! The crate prunes a `K x N` weight matrix under one of six patterns
//! (element-, vector-, block-, tile-wise and the two tile hybrids), stores
//! the tile-wise result in a condensed tile layout or a compressed tile
//! offset (CTO) encoding, and multiplies it against dense activations with
//! executors that are checked against a masked dense reference.

pub mod error;
pub mod executor;
pub mod formats;
pub mod mask;
pub mod matrix;
pub mod metrics;
pub mod patterns;
pub mod scheduler;
pub mod scoring;
pub mod select;
pub mod synth;
pub mod tgm;

pub use error::{Error, Result};
pub use mask::{ElementMask, IndexMask};
pub use matrix::{DenseMatrix, TileConfig};
pub use scoring::ScoreProvider;
pub use select::{select_prune_units, Selection};

/// Converts a fraction of `n` units into a whole unit count, rounding down.
///
/// A tiny tolerance absorbs products such as `0.29 * 100 = 28.999999999999996`
/// that are integral in exact arithmetic.
pub fn budget(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let count = (raw + 1e-9).floor();
    if count <= 0.0 {
        0
    } else {
        (count as usize).min(n)
    }
}
