//! Multi-stage pruning with optional cross-layer (global) budgeting.
//!
//! The target sparsity is approached in steps of `s_s`. Each stage prunes
//! the weights left by the previous stage, intersects the new mask with the
//! old one so pruned positions stay pruned, and hands the masked weights to
//! a fine-tune hook that may adjust surviving values only.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::budget;
use crate::error::{Error, Result};
use crate::mask::{ElementMask, IndexMask};
use crate::matrix::{DenseMatrix, TileConfig};
use crate::patterns::{
    apply_two_four, assemble_tw, column_scores, condense_columns, prune_bw, prune_ew, prune_tew,
    prune_tvw, prune_tw, prune_vw, restore_overlay, segment_scores, tile_rows_from_pruned,
    tvw_tile_share, Clamp, Pattern, PrunePlan, SparseOverlay, TileSparseMatrix, VwMeta,
};
use crate::scoring::{group_element_scores, score_elements, ScoreKind, ScoreProvider};
use crate::select::{rank_ascending, Selection};

fn default_g() -> usize {
    32
}

fn default_vector_len() -> usize {
    4
}

fn default_score() -> ScoreKind {
    ScoreKind::Magnitude
}

/// Schedule configuration, read from JSON as
/// `{"pattern", "S", "s_s", "g", "delta", "score", "global"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSchedule {
    pub pattern: Pattern,
    #[serde(rename = "S")]
    pub target: f64,
    #[serde(rename = "s_s")]
    pub step: f64,
    #[serde(default = "default_g")]
    pub g: usize,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_score")]
    pub score: ScoreKind,
    #[serde(default)]
    pub global: bool,
    #[serde(default = "default_vector_len")]
    pub vector_len: usize,
    /// Block edge for BW; defaults to `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

impl PruneSchedule {
    pub fn single(pattern: Pattern, target: f64) -> Self {
        Self {
            pattern,
            target,
            step: target,
            g: default_g(),
            delta: 0.0,
            score: ScoreKind::Magnitude,
            global: false,
            vector_len: default_vector_len(),
            block: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pass_through = self.target == 0.0 && self.step == 0.0;
        if !pass_through && !(self.step > 0.0 && self.step <= self.target && self.target < 1.0) {
            return Err(Error::invalid(format!(
                "schedule needs 0 < s_s <= S < 1, got s_s={} S={}",
                self.step, self.target
            )));
        }
        if self.g == 0 {
            return Err(Error::invalid("tile width g must be positive"));
        }
        if self.block == Some(0) {
            return Err(Error::invalid("block size must be positive"));
        }
        if self.pattern == Pattern::Vw && self.vector_len < 2 {
            return Err(Error::invalid("vector length must be at least 2"));
        }
        if self.pattern == Pattern::Tew && (self.delta < 0.0 || self.target + self.delta >= 1.0) {
            return Err(Error::invalid(format!(
                "TEW needs delta >= 0 and S + delta < 1, got S={} delta={}",
                self.target, self.delta
            )));
        }
        if self.pattern == Pattern::Tvw && self.target < 0.5 {
            return Err(Error::invalid(format!(
                "TVW sparsity must be at least 0.5 because the 2:4 stage always removes half, got {}",
                self.target
            )));
        }
        Ok(())
    }

    /// Sparsity of each stage: `s_s, 2 s_s, ...`, with the last stage at
    /// exactly `S`. TVW stages below the 2:4 floor are raised to 0.5. A
    /// zero target with a zero step is a single pass-through stage.
    pub fn stage_targets(&self) -> Vec<f64> {
        if self.step <= 0.0 {
            return vec![self.target];
        }
        let mut out: Vec<f64> = Vec::new();
        let mut k = 1usize;
        loop {
            let s = k as f64 * self.step;
            let s = if s >= self.target - 1e-12 {
                self.target
            } else {
                s
            };
            let s = if self.pattern == Pattern::Tvw {
                s.max(0.5)
            } else {
                s
            };
            if out.last() != Some(&s) {
                out.push(s);
            }
            if s >= self.target {
                return out;
            }
            k += 1;
        }
    }

    pub fn block(&self) -> usize {
        self.block.unwrap_or(self.g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub weights: DenseMatrix,
    pub gradient: Option<DenseMatrix>,
}

/// Named weight matrices pruned together.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSet {
    layers: Vec<Layer>,
}

impl LayerSet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("layer set is empty"));
        }
        let mut seen = HashSet::new();
        for l in &layers {
            if !seen.insert(l.name.as_str()) {
                return Err(Error::invalid(format!("duplicate layer name `{}`", l.name)));
            }
            if let Some(g) = &l.gradient {
                if g.dims() != l.weights.dims() {
                    return Err(Error::invalid(format!(
                        "gradient of layer `{}` has the wrong shape",
                        l.name
                    )));
                }
            }
        }
        Ok(Self { layers })
    }

    pub fn single(name: &str, weights: DenseMatrix) -> Self {
        Self {
            layers: vec![Layer {
                name: name.to_string(),
                weights,
                gradient: None,
            }],
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    fn provider(&self, i: usize, kind: ScoreKind) -> Result<ScoreProvider> {
        match kind {
            ScoreKind::Magnitude => Ok(ScoreProvider::Magnitude),
            ScoreKind::Taylor => {
                let l = &self.layers[i];
                let gradient = l.gradient.clone().ok_or_else(|| {
                    Error::invalid(format!(
                        "taylor scores need a gradient for layer `{}`",
                        l.name
                    ))
                })?;
                Ok(ScoreProvider::Taylor { gradient })
            }
        }
    }
}

/// Called after each stage with the masked weights. It may change surviving
/// values but must leave pruned positions at zero.
pub trait FineTune {
    fn fine_tune(
        &mut self,
        stage: usize,
        layers: &mut [Layer],
        masks: &[ElementMask],
    ) -> Result<()>;
}

pub struct NoOpFineTune;

impl FineTune for NoOpFineTune {
    fn fine_tune(&mut self, _: usize, _: &mut [Layer], _: &[ElementMask]) -> Result<()> {
        Ok(())
    }
}

impl<F> FineTune for F
where
    F: FnMut(usize, &mut [Layer], &[ElementMask]) -> Result<()>,
{
    fn fine_tune(
        &mut self,
        stage: usize,
        layers: &mut [Layer],
        masks: &[ElementMask],
    ) -> Result<()> {
        self(stage, layers, masks)
    }
}

/// Unit shape for cross-layer ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Element,
    /// Full-height `(K, 1)` columns.
    Column,
    /// `(1, g)` row segments of the uncondensed matrix.
    RowSegment {
        g: usize,
    },
    /// `b x b` blocks.
    Block {
        b: usize,
    },
}

impl UnitKind {
    fn shape(self, k: usize, n: usize) -> (usize, usize) {
        match self {
            UnitKind::Element => (1, 1),
            UnitKind::Column => (k, 1),
            UnitKind::RowSegment { g } => (1, g.min(n)),
            UnitKind::Block { b } => (b.min(k), b.min(n)),
        }
    }
}

/// Units of every layer in one ascending order, ids `(layer, unit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRanking {
    pub ranked: Vec<((usize, usize), f64)>,
    pub units_per_layer: Vec<usize>,
}

impl GlobalRanking {
    /// Prunes `floor(s * total_units)` units across all layers; returns
    /// each layer's pruned unit ids, lowest score first.
    pub fn prune(&self, s: f64) -> Vec<Vec<usize>> {
        let total: usize = self.units_per_layer.iter().sum();
        let count = budget(s, total);
        let mut out = vec![Vec::new(); self.units_per_layer.len()];
        for &((l, u), _) in &self.ranked[..count] {
            out[l].push(u);
        }
        out
    }
}

fn rank_layers(per_layer: Vec<Vec<f64>>) -> Result<GlobalRanking> {
    let units_per_layer = per_layer.iter().map(Vec::len).collect();
    let pairs: Vec<((usize, usize), f64)> = per_layer
        .into_iter()
        .enumerate()
        .flat_map(|(l, s)| s.into_iter().enumerate().map(move |(u, v)| ((l, u), v)))
        .collect();
    Ok(GlobalRanking {
        ranked: rank_ascending(&pairs)?,
        units_per_layer,
    })
}

/// Ranks the units of all layers together; ties break by `(layer, unit)`.
pub fn global_rank(layers: &LayerSet, unit: UnitKind, kind: ScoreKind) -> Result<GlobalRanking> {
    let mut per_layer = Vec::with_capacity(layers.len());
    for (i, l) in layers.layers().iter().enumerate() {
        let (k, n) = l.weights.dims();
        let elem = score_elements(&l.weights, &layers.provider(i, kind)?)?;
        per_layer.push(group_element_scores(&elem, unit.shape(k, n))?.scores);
    }
    rank_layers(per_layer)
}

/// Selection over a global ranking, for callers that want the raw
/// [`Selection`] view.
pub fn global_selection(ranking: &GlobalRanking, s: f64) -> Selection<(usize, usize)> {
    let total: usize = ranking.units_per_layer.iter().sum();
    Selection {
        unit_scores: ranking.ranked.clone(),
        prune_count: budget(s, total),
    }
}

/// Final state of one layer.
#[derive(Debug, Clone)]
pub struct LayerOutcome {
    pub name: String,
    pub plan: PrunePlan,
    /// Weights after the last stage and hook, zero at pruned positions.
    pub weights: DenseMatrix,
    pub tiles: Option<TileSparseMatrix>,
    pub overlay: Option<SparseOverlay>,
    pub vw: Option<VwMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStage {
    pub name: String,
    pub achieved: f64,
}

/// One line of the stage log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub target: f64,
    pub achieved: f64,
    pub layers: Vec<LayerStage>,
    pub clamps: Vec<Clamp>,
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub layers: Vec<LayerOutcome>,
    pub stages: Vec<StageRecord>,
}

impl ScheduleOutcome {
    /// Stage log as JSON lines.
    pub fn write_stage_log(&self, mut w: impl Write) -> Result<()> {
        for s in &self.stages {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Pattern output for one layer before mask intersection.
struct Pruned {
    plan: PrunePlan,
    tiles: Option<TileSparseMatrix>,
    overlay: Option<SparseOverlay>,
    vw: Option<VwMeta>,
}

impl Pruned {
    fn plain(plan: PrunePlan) -> Self {
        Self {
            plan,
            tiles: None,
            overlay: None,
            vw: None,
        }
    }
}

fn prune_layer(
    w: &DenseMatrix,
    s: f64,
    sched: &PruneSchedule,
    p: &ScoreProvider,
) -> Result<Pruned> {
    Ok(match sched.pattern {
        Pattern::Ew => Pruned::plain(prune_ew(w, s, p)?),
        Pattern::Bw => Pruned::plain(prune_bw(w, s, sched.block(), p)?),
        Pattern::Vw => {
            let (plan, meta) = prune_vw(w, s, sched.vector_len, p)?;
            Pruned {
                vw: Some(meta),
                ..Pruned::plain(plan)
            }
        }
        Pattern::Tw => {
            let r = prune_tw(w, s, sched.g, p)?;
            Pruned {
                tiles: Some(r.tiles),
                ..Pruned::plain(r.plan)
            }
        }
        Pattern::Tew => {
            let r = prune_tew(w, s, sched.delta, sched.g, p)?;
            Pruned {
                tiles: Some(r.tiles),
                overlay: Some(r.overlay),
                ..Pruned::plain(r.plan)
            }
        }
        Pattern::Tvw => {
            let r = prune_tvw(w, s, sched.g, p)?;
            Pruned {
                tiles: Some(r.tiles),
                vw: Some(r.vw),
                ..Pruned::plain(r.plan)
            }
        }
    })
}

fn mask_from_units(dims: (usize, usize), unit: UnitKind, units: &[usize]) -> ElementMask {
    let (k, n) = dims;
    let (ur, uc) = unit.shape(k, n);
    let grid_cols = n.div_ceil(uc);
    let mut mask = ElementMask::all_kept(k, n);
    for &u in units {
        let r0 = (u / grid_cols) * ur;
        let c0 = (u % grid_cols) * uc;
        for r in r0..(r0 + ur).min(k) {
            for c in c0..(c0 + uc).min(n) {
                mask.set(r, c, false);
            }
        }
    }
    mask
}

/// TW with columns and row segments ranked across all layers.
fn global_tw(
    weights: &[DenseMatrix],
    elems: &[DenseMatrix<f64>],
    tw_target: f64,
    g: usize,
) -> Result<Vec<(TileSparseMatrix, Vec<Clamp>)>> {
    let s = crate::patterns::tw_per_dimension(tw_target);
    let config = TileConfig::with_granularity(g)?;
    let cols = rank_layers(elems.iter().map(column_scores).collect())?.prune(s);
    let col_masks: Vec<(IndexMask, Option<Clamp>)> = weights
        .iter()
        .zip(&cols)
        .map(|(w, pruned)| condense_columns(w.cols(), pruned))
        .collect();
    let segs = rank_layers(
        elems
            .iter()
            .zip(&col_masks)
            .map(|(e, (cm, _))| segment_scores(e, cm, g))
            .collect(),
    )?
    .prune(s);
    let mut out = Vec::with_capacity(weights.len());
    for ((w, (cm, col_clamp)), pruned) in weights.iter().zip(col_masks).zip(segs) {
        let tiles = cm.len().div_ceil(g);
        let (rows, mut clamps) = tile_rows_from_pruned(w.rows(), tiles, &pruned);
        if let Some(c) = col_clamp {
            clamps.insert(0, c);
        }
        out.push((assemble_tw(w, config, cm, rows)?, clamps));
    }
    Ok(out)
}

fn prune_global(
    weights: &[DenseMatrix],
    providers: &[ScoreProvider],
    s: f64,
    sched: &PruneSchedule,
) -> Result<Vec<Pruned>> {
    let elems: Vec<DenseMatrix<f64>> = weights
        .iter()
        .zip(providers)
        .map(|(w, p)| score_elements(w, p))
        .collect::<Result<_>>()?;
    let grouped = |unit: UnitKind| -> Result<Vec<Pruned>> {
        let per_layer = weights
            .iter()
            .zip(&elems)
            .map(|(w, e)| Ok(group_element_scores(e, unit.shape(w.rows(), w.cols()))?.scores))
            .collect::<Result<Vec<_>>>()?;
        let pruned = rank_layers(per_layer)?.prune(s);
        Ok(weights
            .iter()
            .zip(pruned)
            .map(|(w, units)| {
                let mask = mask_from_units(w.dims(), unit, &units);
                Pruned::plain(PrunePlan::new(sched.pattern, s, mask))
            })
            .collect())
    };
    match sched.pattern {
        Pattern::Ew => grouped(UnitKind::Element),
        Pattern::Bw => grouped(UnitKind::Block { b: sched.block() }),
        Pattern::Vw => weights
            .iter()
            .zip(providers)
            .map(|(w, p)| prune_layer(w, s, sched, p))
            .collect(),
        Pattern::Tw | Pattern::Tew | Pattern::Tvw => {
            let tw_target = match sched.pattern {
                Pattern::Tw => s,
                Pattern::Tew => s + sched.delta,
                _ => tvw_tile_share(s),
            };
            let tw = global_tw(weights, &elems, tw_target, sched.g)?;
            let mut out = Vec::with_capacity(weights.len());
            for ((w, e), (mut tiles, clamps)) in weights.iter().zip(&elems).zip(tw) {
                let mut mask = tiles.structural_mask();
                let mut overlay = None;
                let mut vw = None;
                match sched.pattern {
                    Pattern::Tew => {
                        let restore = budget(sched.delta, w.rows() * w.cols());
                        let (ov, m) = restore_overlay(w, e, &mask, restore)?;
                        mask = m;
                        overlay = Some(ov);
                    }
                    Pattern::Tvw => vw = Some(apply_two_four(&mut tiles, e, &mut mask)?),
                    _ => {}
                }
                let mut plan = crate::patterns::summarize_tw(
                    sched.pattern,
                    s,
                    tw_target,
                    &tiles,
                    clamps,
                    mask,
                );
                if let Some(ov) = &overlay {
                    plan.delta = Some(sched.delta);
                    plan.restored = Some(ov.nnz());
                }
                out.push(Pruned {
                    plan,
                    tiles: Some(tiles),
                    overlay,
                    vw,
                });
            }
            Ok(out)
        }
    }
}

/// Rebuilds tile payloads and overlay values from `w` so they reflect the
/// current mask and any fine-tuned values.
fn refresh(
    w: &DenseMatrix,
    mask: &ElementMask,
    tiles: Option<&TileSparseMatrix>,
    overlay: Option<&SparseOverlay>,
) -> Result<(Option<TileSparseMatrix>, Option<SparseOverlay>)> {
    let tiles = tiles
        .map(|t| {
            let rows = t.tiles().iter().map(|x| x.kept_rows.clone()).collect();
            TileSparseMatrix::from_weights(w, t.config(), t.column_mask().clone(), rows)
        })
        .transpose()?;
    let overlay = overlay
        .map(|o| {
            SparseOverlay::from_entries(
                o.dims,
                o.entries()
                    .filter(|&(r, c, _)| mask.is_kept(r, c))
                    .map(|(r, c, _)| (r, c, w.get(r, c))),
            )
        })
        .transpose()?;
    Ok((tiles, overlay))
}

/// Runs the stages of `sched` over `layers`.
pub fn run_schedule(
    layers: LayerSet,
    sched: &PruneSchedule,
    hook: &mut dyn FineTune,
) -> Result<ScheduleOutcome> {
    sched.validate()?;
    let providers: Vec<ScoreProvider> = (0..layers.len())
        .map(|i| layers.provider(i, sched.score))
        .collect::<Result<_>>()?;
    let mut layers = layers.layers;
    let mut masks: Vec<ElementMask> = layers
        .iter()
        .map(|l| {
            let (k, n) = l.weights.dims();
            ElementMask::all_kept(k, n)
        })
        .collect();
    let mut current: Vec<Option<Pruned>> = layers.iter().map(|_| None).collect();
    let mut stages = Vec::new();

    for (stage, s) in sched.stage_targets().into_iter().enumerate() {
        let weights: Vec<DenseMatrix> = layers.iter().map(|l| l.weights.clone()).collect();
        let pruned = if sched.global {
            prune_global(&weights, &providers, s, sched)?
        } else {
            weights
                .iter()
                .zip(&providers)
                .map(|(w, p)| prune_layer(w, s, sched, p))
                .collect::<Result<Vec<_>>>()?
        };

        let mut clamps = Vec::new();
        for (i, mut p) in pruned.into_iter().enumerate() {
            let mask = p.plan.element_mask.intersect(&masks[i])?;
            layers[i].weights = mask.apply(&layers[i].weights)?;
            p.plan.set_mask(mask.clone());
            clamps.extend(p.plan.clamps.iter().copied());
            masks[i] = mask;
            current[i] = Some(p);
        }

        hook.fine_tune(stage, &mut layers, &masks)?;
        for (l, m) in layers.iter().zip(&masks) {
            if l.weights.dims() != m.dims() {
                return Err(Error::contract(format!(
                    "fine-tune hook reshaped layer `{}`",
                    l.name
                )));
            }
            if let Some((r, c)) = m
                .pruned_positions()
                .into_iter()
                .find(|&(r, c)| l.weights.get(r, c) != 0.0)
            {
                return Err(Error::contract(format!(
                    "fine-tune hook wrote to pruned position ({r}, {c}) of layer `{}`",
                    l.name
                )));
            }
        }

        let total: usize = masks.iter().map(|m| m.total()).sum();
        let pruned: usize = masks.iter().map(|m| m.pruned_count()).sum();
        stages.push(StageRecord {
            stage,
            target: s,
            achieved: pruned as f64 / total as f64,
            layers: layers
                .iter()
                .zip(&masks)
                .map(|(l, m)| LayerStage {
                    name: l.name.clone(),
                    achieved: m.sparsity(),
                })
                .collect(),
            clamps,
        });
    }

    let mut outcomes = Vec::with_capacity(layers.len());
    for ((layer, mask), p) in layers.into_iter().zip(masks).zip(current) {
        let mut p = p.expect("at least one stage ran");
        let (tiles, overlay) =
            refresh(&layer.weights, &mask, p.tiles.as_ref(), p.overlay.as_ref())?;
        p.plan.set_mask(mask);
        if let Some(ov) = &overlay {
            p.plan.restored = Some(ov.nnz());
        }
        outcomes.push(LayerOutcome {
            name: layer.name,
            plan: p.plan,
            weights: layer.weights,
            tiles,
            overlay,
            vw: p.vw,
        });
    }
    Ok(ScheduleOutcome {
        layers: outcomes,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gaussian;

    fn sched(pattern: Pattern, target: f64, step: f64) -> PruneSchedule {
        PruneSchedule {
            step,
            g: 4,
            ..PruneSchedule::single(pattern, target)
        }
    }

    #[test]
    fn stage_targets_follow_steps() {
        assert_eq!(
            sched(Pattern::Ew, 0.75, 0.25).stage_targets(),
            vec![0.25, 0.5, 0.75]
        );
        assert_eq!(sched(Pattern::Ew, 0.5, 0.5).stage_targets(), vec![0.5]);
        assert_eq!(
            sched(Pattern::Ew, 0.7, 0.3).stage_targets(),
            vec![0.3, 0.6, 0.7]
        );
        assert_eq!(
            sched(Pattern::Tvw, 0.75, 0.25).stage_targets(),
            vec![0.5, 0.75]
        );
    }

    #[test]
    fn schedule_validation() {
        assert!(sched(Pattern::Ew, 0.5, 0.0).validate().is_err());
        assert!(sched(Pattern::Ew, 0.5, 0.6).validate().is_err());
        assert!(sched(Pattern::Ew, 1.0, 0.5).validate().is_err());
        assert!(sched(Pattern::Tvw, 0.4, 0.2).validate().is_err());
        let mut s = sched(Pattern::Tew, 0.8, 0.4);
        s.delta = 0.2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn schedule_json_keys() {
        let s: PruneSchedule = serde_json::from_str(
            r#"{"pattern":"tw","S":0.75,"s_s":0.25,"g":128,"delta":0.0,"score":"magnitude","global":true}"#,
        )
        .unwrap();
        assert_eq!(s.pattern, Pattern::Tw);
        assert_eq!(s.g, 128);
        assert!(s.global);
    }

    #[test]
    fn duplicate_layer_names_rejected() {
        let w = gaussian(2, 2, 1).unwrap();
        let l = Layer {
            name: "a".into(),
            weights: w,
            gradient: None,
        };
        assert!(LayerSet::new(vec![l.clone(), l]).is_err());
    }

    #[test]
    fn global_rank_prunes_lowest_layer() {
        let layers = LayerSet::new(vec![
            Layer {
                name: "a".into(),
                weights: DenseMatrix::new(1, 1, vec![1.0]).unwrap(),
                gradient: None,
            },
            Layer {
                name: "b".into(),
                weights: DenseMatrix::new(1, 1, vec![5.0]).unwrap(),
                gradient: None,
            },
        ])
        .unwrap();
        let ranking = global_rank(&layers, UnitKind::Column, ScoreKind::Magnitude).unwrap();
        assert_eq!(ranking.prune(0.5), vec![vec![0], vec![]]);
        assert_eq!(global_selection(&ranking, 0.5).pruned(), vec![(0, 0)]);
    }

    #[test]
    fn multi_stage_ew_matches_single_shot() {
        let w = gaussian(12, 10, 7).unwrap();
        let out = run_schedule(
            LayerSet::single("w", w.clone()),
            &sched(Pattern::Ew, 0.75, 0.25),
            &mut NoOpFineTune,
        )
        .unwrap();
        let direct = prune_ew(&w, 0.75, &ScoreProvider::Magnitude).unwrap();
        assert_eq!(out.layers[0].plan.element_mask, direct.element_mask);
        assert_eq!(out.stages.len(), 3);
    }

    #[test]
    fn hook_may_not_resurrect() {
        let w = gaussian(6, 6, 7).unwrap();
        let mut bad = |_: usize, layers: &mut [Layer], masks: &[ElementMask]| -> Result<()> {
            let (r, c) = masks[0].pruned_positions()[0];
            layers[0].weights.set(r, c, 1.0);
            Ok(())
        };
        let err = run_schedule(
            LayerSet::single("w", w),
            &sched(Pattern::Ew, 0.5, 0.5),
            &mut bad,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }

    #[test]
    fn hook_may_scale_survivors() {
        let w = gaussian(8, 8, 7).unwrap();
        let mut scale = |_: usize, layers: &mut [Layer], _: &[ElementMask]| -> Result<()> {
            for v in layers[0].weights.data_mut() {
                *v *= 2.0;
            }
            Ok(())
        };
        let out = run_schedule(
            LayerSet::single("w", w),
            &sched(Pattern::Tw, 0.5, 0.25),
            &mut scale,
        )
        .unwrap();
        let l = &out.layers[0];
        assert_eq!(l.tiles.as_ref().unwrap().reconstruct(), l.weights);
    }

    #[test]
    fn stage_log_is_json_lines() {
        let w = gaussian(8, 8, 7).unwrap();
        let out = run_schedule(
            LayerSet::single("w", w),
            &sched(Pattern::Tw, 0.75, 0.25),
            &mut NoOpFineTune,
        )
        .unwrap();
        let mut buf = Vec::new();
        out.write_stage_log(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let rec: StageRecord = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert_eq!(rec.target, 0.75);
    }
}
