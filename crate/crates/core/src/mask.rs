//! Index masks (kept rows or columns) and per-element keep masks.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Sorted set of kept indices within `[0, domain_len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMask {
    domain_len: usize,
    kept: Vec<usize>,
}

impl IndexMask {
    pub fn new(domain_len: usize, kept: Vec<usize>) -> Result<Self> {
        if let Some(w) = kept.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "mask indices must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = kept.last() {
            if last >= domain_len {
                return Err(Error::invalid(format!(
                    "mask index {last} outside domain of length {domain_len}"
                )));
            }
        }
        Ok(Self { domain_len, kept })
    }

    pub fn all(domain_len: usize) -> Self {
        Self {
            domain_len,
            kept: (0..domain_len).collect(),
        }
    }

    pub fn from_keep_flags(flags: &[bool]) -> Self {
        Self {
            domain_len: flags.len(),
            kept: flags
                .iter()
                .enumerate()
                .filter_map(|(i, &k)| k.then_some(i))
                .collect(),
        }
    }

    pub fn domain_len(&self) -> usize {
        self.domain_len
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.kept.binary_search(&idx).is_ok()
    }

    pub fn density(&self) -> f64 {
        if self.domain_len == 0 {
            return 0.0;
        }
        self.kept.len() as f64 / self.domain_len as f64
    }

    pub fn keep_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.domain_len];
        for &k in &self.kept {
            flags[k] = true;
        }
        flags
    }
}

/// Keep (`true`) or prune (`false`) flag for every element of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementMask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
}

impl ElementMask {
    pub fn all_kept(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            keep: vec![true; rows * cols],
        }
    }

    pub fn from_flags(rows: usize, cols: usize, keep: Vec<bool>) -> Result<Self> {
        if keep.len() != rows * cols {
            return Err(Error::invalid(format!(
                "mask has {} flags, expected {rows}x{cols}",
                keep.len()
            )));
        }
        Ok(Self { rows, cols, keep })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_kept(&self, r: usize, c: usize) -> bool {
        self.keep[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, keep: bool) {
        self.keep[r * self.cols + c] = keep;
    }

    pub fn flags(&self) -> &[bool] {
        &self.keep
    }

    pub fn total(&self) -> usize {
        self.keep.len()
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn pruned_count(&self) -> usize {
        self.total() - self.kept_count()
    }

    /// Fraction of pruned elements.
    pub fn sparsity(&self) -> f64 {
        self.pruned_count() as f64 / self.total() as f64
    }

    /// Pruned positions as `(row, col)` in row-major order.
    pub fn pruned_positions(&self) -> Vec<(usize, usize)> {
        self.keep
            .iter()
            .enumerate()
            .filter(|(_, &k)| !k)
            .map(|(i, _)| (i / self.cols, i % self.cols))
            .collect()
    }

    /// Elementwise AND: an element survives only if both masks keep it.
    pub fn intersect(&self, other: &ElementMask) -> Result<ElementMask> {
        if self.dims() != other.dims() {
            return Err(Error::invalid("cannot intersect masks of different shapes"));
        }
        Ok(ElementMask {
            rows: self.rows,
            cols: self.cols,
            keep: self
                .keep
                .iter()
                .zip(&other.keep)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    /// True when every element pruned by `self` is also pruned by `other`.
    pub fn pruned_subset_of(&self, other: &ElementMask) -> bool {
        self.dims() == other.dims() && self.keep.iter().zip(&other.keep).all(|(&a, &b)| a || !b)
    }

    /// Copy of `m` with pruned positions set to zero.
    pub fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.dims() != self.dims() {
            return Err(Error::invalid(format!(
                "mask is {}x{} but matrix is {}x{}",
                self.rows,
                self.cols,
                m.rows(),
                m.cols()
            )));
        }
        let data = m
            .data()
            .iter()
            .zip(&self.keep)
            .map(|(&v, &k)| if k { v } else { 0.0 })
            .collect();
        DenseMatrix::new(self.rows, self.cols, data)
    }

    fn packed(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.keep.len().div_ceil(8)];
        for (i, &k) in self.keep.iter().enumerate() {
            if k {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes
    }
}

/// JSON form: dimensions plus row-major keep bits packed LSB-first and
/// base64 encoded.
#[derive(Serialize, Deserialize)]
struct PackedMask {
    rows: usize,
    cols: usize,
    bits: String,
}

impl Serialize for ElementMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PackedMask {
            rows: self.rows,
            cols: self.cols,
            bits: STANDARD.encode(self.packed()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElementMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let p = PackedMask::deserialize(d)?;
        let bytes = STANDARD.decode(&p.bits).map_err(D::Error::custom)?;
        let n = p.rows * p.cols;
        if bytes.len() != n.div_ceil(8) {
            return Err(D::Error::custom("mask bit string has the wrong length"));
        }
        let keep = (0..n).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect();
        ElementMask::from_flags(p.rows, p.cols, keep).map_err(D::Error::custom)
    }
}
