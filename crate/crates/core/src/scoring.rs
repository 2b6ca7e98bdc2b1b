//! Importance scores for pruning units.
//!
//! Element scores are either the weight magnitude `|w|` or the first-order
//! Taylor term `|w * grad|`. Group units (columns, row segments, blocks,
//! vectors) score as the sum of their element scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Magnitude,
    Taylor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoreProvider {
    Magnitude,
    Taylor { gradient: DenseMatrix },
}

impl ScoreProvider {
    pub fn kind(&self) -> ScoreKind {
        match self {
            ScoreProvider::Magnitude => ScoreKind::Magnitude,
            ScoreProvider::Taylor { .. } => ScoreKind::Taylor,
        }
    }

    fn check(&self, w: &DenseMatrix) -> Result<()> {
        if let ScoreProvider::Taylor { gradient } = self {
            if gradient.dims() != w.dims() {
                return Err(Error::invalid(format!(
                    "gradient is {}x{} but weights are {}x{}",
                    gradient.rows(),
                    gradient.cols(),
                    w.rows(),
                    w.cols()
                )));
            }
        }
        Ok(())
    }
}

/// Per-element importance scores, same shape as `w`.
pub fn score_elements(w: &DenseMatrix, p: &ScoreProvider) -> Result<DenseMatrix<f64>> {
    p.check(w)?;
    let data = match p {
        ScoreProvider::Magnitude => w.data().iter().map(|&v| f64::from(v).abs()).collect(),
        ScoreProvider::Taylor { gradient } => w
            .data()
            .iter()
            .zip(gradient.data())
            .map(|(&v, &g)| (f64::from(v) * f64::from(g)).abs())
            .collect(),
    };
    DenseMatrix::new(w.rows(), w.cols(), data)
}

/// Scores of rectangular units tiling a matrix. Units are laid out on a
/// `grid_rows x grid_cols` grid and indexed row-major; trailing units may be
/// smaller than `unit_shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupScores {
    pub unit_shape: (usize, usize),
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub scores: Vec<f64>,
}

impl GroupScores {
    #[inline]
    pub fn unit_index(&self, grid_r: usize, grid_c: usize) -> usize {
        grid_r * self.grid_cols + grid_c
    }

    /// Element rectangle `(row_range, col_range)` covered by unit `idx`,
    /// clipped to a `rows x cols` matrix.
    pub fn unit_bounds(
        &self,
        idx: usize,
        rows: usize,
        cols: usize,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let (ur, uc) = self.unit_shape;
        let gr = idx / self.grid_cols;
        let gc = idx % self.grid_cols;
        let r0 = gr * ur;
        let c0 = gc * uc;
        (r0..(r0 + ur).min(rows), c0..(c0 + uc).min(cols))
    }

    pub fn as_pairs(&self) -> Vec<(usize, f64)> {
        self.scores.iter().copied().enumerate().collect()
    }
}

/// Sums element scores over `unit_shape` units.
pub fn score_group(
    w: &DenseMatrix,
    unit_shape: (usize, usize),
    p: &ScoreProvider,
) -> Result<GroupScores> {
    let elems = score_elements(w, p)?;
    group_element_scores(&elems, unit_shape)
}

/// Groups precomputed element scores into units.
pub fn group_element_scores(
    elems: &DenseMatrix<f64>,
    unit_shape: (usize, usize),
) -> Result<GroupScores> {
    let (ur, uc) = unit_shape;
    if ur == 0 || uc == 0 {
        return Err(Error::invalid(format!(
            "unit shape must be positive, got {ur}x{uc}"
        )));
    }
    let (rows, cols) = elems.dims();
    if ur > rows && uc > cols {
        return Err(Error::invalid(format!(
            "unit {ur}x{uc} is larger than the {rows}x{cols} matrix"
        )));
    }
    let grid_rows = rows.div_ceil(ur);
    let grid_cols = cols.div_ceil(uc);
    let mut scores = vec![0.0; grid_rows * grid_cols];
    for r in 0..rows {
        let base = (r / ur) * grid_cols;
        for (c, &s) in elems.row(r).iter().enumerate() {
            scores[base + c / uc] += s;
        }
    }
    Ok(GroupScores {
        unit_shape,
        grid_rows,
        grid_cols,
        scores,
    })
}
