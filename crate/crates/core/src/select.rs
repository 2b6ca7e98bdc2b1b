//! Exact-count selection of the lowest-scored pruning units.

use std::cmp::Ordering;

use crate::budget;
use crate::error::{Error, Result};

/// Outcome of ranking units by score and marking the lowest ones pruned.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<I = usize> {
    /// Input scores sorted ascending by `(score, id)`.
    pub unit_scores: Vec<(I, f64)>,
    pub prune_count: usize,
}

impl<I: Copy + Ord> Selection<I> {
    /// Pruned ids in ascending id order.
    pub fn pruned(&self) -> Vec<I> {
        let mut ids: Vec<I> = self.unit_scores[..self.prune_count]
            .iter()
            .map(|&(id, _)| id)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Pruned ids from lowest to highest score.
    pub fn pruned_by_rank(&self) -> impl Iterator<Item = I> + '_ {
        self.unit_scores[..self.prune_count]
            .iter()
            .map(|&(id, _)| id)
    }

    pub fn unit_count(&self) -> usize {
        self.unit_scores.len()
    }
}

/// Sorts `(id, score)` pairs ascending by score, ties broken by ascending id.
pub fn rank_ascending<I: Copy + Ord>(scores: &[(I, f64)]) -> Result<Vec<(I, f64)>> {
    if scores.is_empty() {
        return Err(Error::invalid("cannot rank an empty score list"));
    }
    if let Some((_, s)) = scores.iter().find(|(_, s)| !s.is_finite()) {
        return Err(Error::invalid(format!("score {s} is not finite")));
    }
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| match a.1.total_cmp(&b.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    if ranked.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("duplicate unit id in score list"));
    }
    Ok(ranked)
}

/// Marks exactly `floor(target_sparsity * n)` of the lowest-scored units as
/// pruned. The result depends only on the set of `(id, score)` pairs, not
/// on their order.
pub fn select_prune_units<I: Copy + Ord>(
    scores: &[(I, f64)],
    target_sparsity: f64,
) -> Result<Selection<I>> {
    if !(0.0..=1.0).contains(&target_sparsity) {
        return Err(Error::invalid(format!(
            "target sparsity {target_sparsity} outside [0, 1]"
        )));
    }
    let unit_scores = rank_ascending(scores)?;
    let prune_count = budget(target_sparsity, unit_scores.len());
    Ok(Selection {
        unit_scores,
        prune_count,
    })
}

/// Selection with an explicit prune count instead of a fraction.
pub fn select_lowest<I: Copy + Ord>(scores: &[(I, f64)], count: usize) -> Result<Selection<I>> {
    let unit_scores = rank_ascending(scores)?;
    if count > unit_scores.len() {
        return Err(Error::invalid(format!(
            "cannot prune {count} of {} units",
            unit_scores.len()
        )));
    }
    Ok(Selection {
        unit_scores,
        prune_count: count,
    })
}
