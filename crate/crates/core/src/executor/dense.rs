use super::check_inner;
use crate::error::Result;
use crate::matrix::{DenseMatrix, TileConfig};

/// Reference product with the default blocking.
pub fn gemm_dense(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix<f64>> {
    gemm_dense_blocked(a, b, TileConfig::default())
}

/// Reference product blocked into `T x G` output tiles. Every output
/// element sums its K products in ascending `k`, whatever the blocking.
pub fn gemm_dense_blocked(
    a: &DenseMatrix,
    b: &DenseMatrix,
    cfg: TileConfig,
) -> Result<DenseMatrix<f64>> {
    check_inner(a, b.rows())?;
    let (m, k) = a.dims();
    let n = b.cols();
    let mut out = DenseMatrix::<f64>::zeros(m, n)?;
    let mut acc = vec![0.0f64; cfg.granularity_g];
    for i0 in (0..m).step_by(cfg.input_tile_t) {
        for j0 in (0..n).step_by(cfg.granularity_g) {
            let width = cfg.granularity_g.min(n - j0);
            for i in i0..(i0 + cfg.input_tile_t).min(m) {
                let acc = &mut acc[..width];
                acc.fill(0.0);
                let a_row = a.row(i);
                for (kk, &aik) in a_row.iter().enumerate().take(k) {
                    let aik = f64::from(aik);
                    let b_row = &b.row(kk)[j0..j0 + width];
                    for (c, &bv) in acc.iter_mut().zip(b_row) {
                        *c += aik * f64::from(bv);
                    }
                }
                out.data_mut()[i * n + j0..i * n + j0 + width].copy_from_slice(acc);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gaussian;

    #[test]
    fn identity_left() {
        let b = gaussian(4, 3, 1).unwrap();
        let c = gemm_dense(&DenseMatrix::identity(4).unwrap(), &b).unwrap();
        assert_eq!(c, b.to_f64());
    }

    #[test]
    fn scalar() {
        let a = DenseMatrix::from_rows(&[[2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[3.0]]).unwrap();
        assert_eq!(gemm_dense(&a, &b).unwrap().data(), &[6.0]);
    }

    #[test]
    fn blocking_does_not_change_bits() {
        let a = gaussian(37, 19, 2).unwrap();
        let b = gaussian(19, 23, 3).unwrap();
        let x = gemm_dense_blocked(&a, &b, TileConfig::new(1, 1).unwrap()).unwrap();
        let y = gemm_dense_blocked(&a, &b, TileConfig::new(8, 5).unwrap()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn dim_mismatch() {
        let a = gaussian(2, 3, 1).unwrap();
        assert!(gemm_dense(&a, &a).is_err());
    }
}
