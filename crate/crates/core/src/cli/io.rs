use std::fs;
use std::path::Path;

use tilewise::patterns::{PrunePlan, SparseOverlay};
use tilewise::synth::gaussian;
use tilewise::{tgm, DenseMatrix};

use super::{invalid, CliResult};

/// Parses `KxN`.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (k, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected KxN, got `{s}`"))?;
    let k: usize = k
        .trim()
        .parse()
        .map_err(|_| format!("bad row count in `{s}`"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| format!("bad column count in `{s}`"))?;
    if k == 0 || n == 0 {
        return Err(format!("dimensions must be positive, got `{s}`"));
    }
    Ok((k, n))
}

/// Comma-separated list parsed element by element.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| invalid(format!("cannot parse `{p}` in list `{s}`")))
        })
        .collect()
}

/// Activations from a TGM file, or Gaussian `m x k` from `seed`.
pub fn activations(
    path: Option<&Path>,
    m: Option<usize>,
    seed: u64,
    k: usize,
) -> CliResult<DenseMatrix> {
    let a = match (path, m) {
        (Some(p), None) => tgm::read(p)?,
        (None, Some(m)) => gaussian(m, k, seed)?,
        (None, None) => return Err(invalid("give activations with --a or --m")),
        (Some(_), Some(_)) => return Err(invalid("--a and --m are mutually exclusive")),
    };
    if a.cols() != k {
        return Err(invalid(format!(
            "activations have {} columns, weights have {k} rows",
            a.cols()
        )));
    }
    Ok(a)
}

pub fn read_plan(path: &Path) -> CliResult<PrunePlan> {
    Ok(PrunePlan::from_json(&fs::read_to_string(path)?)?)
}

pub fn read_overlay(path: &Path) -> CliResult<SparseOverlay> {
    let ov: SparseOverlay = serde_json::from_str(&fs::read_to_string(path)?)?;
    ov.validate()?;
    Ok(ov)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
