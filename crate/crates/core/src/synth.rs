//! Deterministic synthetic matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::matrix::DenseMatrix;

/// Standard-normal `rows x cols` matrix drawn from a ChaCha stream keyed by
/// `seed`. The same seed always yields the same matrix on every platform.
pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DenseMatrix::new(rows, cols, data)
}
