use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::thread;

use serde::{Deserialize, Serialize};

use super::sparse::{add_overlay, check_overlay, scatter_tile, tile_product};
use super::{check_inner, GemmOutput};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::metrics::imbalance;
use crate::patterns::{SparseOverlay, TileSparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Longest processing time first: heaviest tile to the least loaded worker.
    Lpt,
    /// Tile `i` to worker `i mod workers`.
    RoundRobin,
}

/// Per-tile and per-worker work of one batched execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchTrace {
    pub strategy: Strategy,
    pub workers: usize,
    /// Multiply-adds per tile: `M * width * kept_rows`.
    pub per_tile_macs: Vec<u64>,
    /// Tiles run by each worker, in execution order.
    pub assignment: Vec<Vec<usize>>,
    pub per_worker_macs: Vec<u64>,
    pub total_macs: u64,
    /// Multiply-adds for overlay entries, run after the tiles.
    pub overlay_macs: u64,
    /// `2 * (total_macs + overlay_macs)`.
    pub flops: u64,
    /// Max over mean per-worker multiply-adds.
    pub imbalance: f64,
}

/// Distributes tiles with the given costs over `workers` lanes.
pub fn assign_tiles(costs: &[u64], workers: usize, strategy: Strategy) -> Vec<Vec<usize>> {
    let mut lanes = vec![Vec::new(); workers];
    match strategy {
        Strategy::RoundRobin => {
            for t in 0..costs.len() {
                lanes[t % workers].push(t);
            }
        }
        Strategy::Lpt => {
            let mut order: Vec<usize> = (0..costs.len()).collect();
            order.sort_by_key(|&t| (Reverse(costs[t]), t));
            let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
                (0..workers).map(|w| Reverse((0, w))).collect();
            for t in order {
                let Reverse((load, w)) = heap.pop().expect("at least one worker");
                lanes[w].push(t);
                heap.push(Reverse((load + costs[t], w)));
            }
        }
    }
    lanes
}

pub fn execute_batched(
    a: &DenseMatrix,
    b: &TileSparseMatrix,
    workers: usize,
) -> Result<(GemmOutput, BatchTrace)> {
    execute_batched_with(a, b, workers, Strategy::Lpt)
}

/// Runs tiles on `workers` threads. Each tile owns a disjoint range of
/// output columns, so lanes never write to the same place; results are
/// merged by tile index after all lanes finish.
pub fn execute_batched_with(
    a: &DenseMatrix,
    b: &TileSparseMatrix,
    workers: usize,
    strategy: Strategy,
) -> Result<(GemmOutput, BatchTrace)> {
    if workers == 0 {
        return Err(Error::invalid(
            "batched execution needs at least one worker",
        ));
    }
    check_inner(a, b.original_dims().0)?;
    let m = a.rows() as u64;
    let costs: Vec<u64> = b
        .tiles()
        .iter()
        .map(|t| m * t.width() as u64 * t.height() as u64)
        .collect();
    let assignment = assign_tiles(&costs, workers, strategy);

    let lane_results: Vec<Vec<(usize, Vec<f64>)>> = thread::scope(|s| {
        let handles: Vec<_> = assignment
            .iter()
            .map(|lane| {
                s.spawn(move || {
                    lane.iter()
                        .map(|&t| (t, tile_product(a, &b.tiles()[t])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tile worker panicked"))
            .collect()
    });

    let g = b.config().granularity_g;
    let mut condensed = DenseMatrix::<f64>::zeros(a.rows(), b.condensed_cols())?;
    let mut results: Vec<(usize, Vec<f64>)> = lane_results.into_iter().flatten().collect();
    results.sort_by_key(|(t, _)| *t);
    for (t, vals) in results {
        scatter_tile(&mut condensed, t * g, b.tiles()[t].width(), &vals);
    }

    let per_worker_macs: Vec<u64> = assignment
        .iter()
        .map(|lane| lane.iter().map(|&t| costs[t]).sum())
        .collect();
    let total_macs = costs.iter().sum();
    let trace = BatchTrace {
        strategy,
        workers,
        imbalance: imbalance(&per_worker_macs),
        per_tile_macs: costs,
        assignment,
        per_worker_macs,
        total_macs,
        overlay_macs: 0,
        flops: 2 * total_macs,
    };
    Ok((
        GemmOutput {
            condensed,
            column_map: b.column_mask().clone(),
        },
        trace,
    ))
}

/// Batched tile execution followed by the overlay product.
pub fn execute_batched_tew(
    a: &DenseMatrix,
    b: &TileSparseMatrix,
    ov: &SparseOverlay,
    workers: usize,
    strategy: Strategy,
) -> Result<(GemmOutput, BatchTrace)> {
    check_overlay(b, ov)?;
    let (base, mut trace) = execute_batched_with(a, b, workers, strategy)?;
    let out = add_overlay(a, &base, ov)?;
    trace.overlay_macs = a.rows() as u64 * ov.nnz() as u64;
    trace.flops = 2 * (trace.total_macs + trace.overlay_macs);
    Ok((out, trace))
}
