//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the pruning or executor code under test.

#![allow(dead_code)]

use tilewise::DenseMatrix;

/// Triple-loop product in f64, summing `k` in ascending order.
pub fn naive_gemm(a: &DenseMatrix, b: &DenseMatrix) -> Vec<f64> {
    let (m, k) = a.dims();
    let n = b.cols();
    assert_eq!(b.rows(), k);
    let mut out = vec![0.0f64; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0f64;
            for p in 0..k {
                acc += f64::from(a.get(i, p)) * f64::from(b.get(p, j));
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Zeroes every position whose flag is false.
pub fn masked(w: &DenseMatrix, keep: &[bool]) -> DenseMatrix {
    let data = w
        .data()
        .iter()
        .zip(keep)
        .map(|(&v, &k)| if k { v } else { 0.0 })
        .collect();
    DenseMatrix::new(w.rows(), w.cols(), data).unwrap()
}

/// Normwise relative error `max |x - y| / max |y|`.
pub fn rel_error(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = x
        .iter()
        .zip(y)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn floor_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9)
        .floor()
        .max(0.0)
        .min(n as f64) as usize
}

/// Ids of the `count` lowest scores, ties broken by lower id.
fn lowest(scores: &[f64], count: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&x, &y| scores[x].partial_cmp(&scores[y]).unwrap().then(x.cmp(&y)));
    ids.truncate(count);
    ids
}

/// Two-pass tile-wise pruning by brute force, magnitude scores. Returns the
/// keep flags in row-major order.
pub fn tw_keep(w: &DenseMatrix, s_t: f64, g: usize) -> Vec<bool> {
    let (k, n) = w.dims();
    let s = 1.0 - (1.0 - s_t).sqrt();

    let col_scores: Vec<f64> = (0..n)
        .map(|c| (0..k).map(|r| f64::from(w.get(r, c).abs())).sum())
        .collect();
    let mut gone = lowest(&col_scores, floor_count(s, n));
    if gone.len() == n {
        gone.pop();
    }
    let kept_cols: Vec<usize> = (0..n).filter(|c| !gone.contains(c)).collect();

    let tiles = kept_cols.len().div_ceil(g);
    let mut seg_scores = vec![0.0f64; tiles * k];
    for t in 0..tiles {
        for r in 0..k {
            let cols = &kept_cols[t * g..((t + 1) * g).min(kept_cols.len())];
            let sum: f64 = cols.iter().map(|&c| f64::from(w.get(r, c).abs())).sum();
            // a narrow last tile is scored as if it were full width
            seg_scores[t * k + r] = if cols.len() < g {
                sum * (g as f64 / cols.len() as f64)
            } else {
                sum
            };
        }
    }
    let ranked = lowest(&seg_scores, floor_count(s, tiles * k));
    let mut seg_keep = vec![true; tiles * k];
    for &id in &ranked {
        seg_keep[id] = false;
    }
    for t in 0..tiles {
        if seg_keep[t * k..(t + 1) * k].iter().all(|&x| !x) {
            let last = *ranked.iter().rev().find(|&&id| id / k == t).unwrap();
            seg_keep[last] = true;
        }
    }

    let mut keep = vec![false; k * n];
    for (pos, &c) in kept_cols.iter().enumerate() {
        let t = pos / g;
        for r in 0..k {
            if seg_keep[t * k + r] {
                keep[r * n + c] = true;
            }
        }
    }
    keep
}

/// Row-major ids of the `count` largest-magnitude positions among those
/// `tw` pruned, ties to the lower id.
pub fn tew_restored(w: &DenseMatrix, tw: &[bool], count: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = (0..tw.len()).filter(|&i| !tw[i]).collect();
    cand.sort_by(|&x, &y| {
        let (a, b) = (w.data()[x].abs(), w.data()[y].abs());
        b.partial_cmp(&a).unwrap().then(x.cmp(&y))
    });
    cand.truncate(count);
    cand.sort_unstable();
    cand
}

/// Complete aligned groups of four along `rows` in `column` that do not hold
/// exactly two nonzeros.
pub fn two_four_violations(w: &DenseMatrix, rows: &[usize], column: usize) -> usize {
    rows.chunks_exact(4)
        .filter(|grp| grp.iter().filter(|&&r| w.get(r, column) != 0.0).count() != 2)
        .count()
}

/// Frobenius norm of `x - y`.
pub fn frobenius_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    x.data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| {
            let d = f64::from(*a) - f64::from(*b);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
