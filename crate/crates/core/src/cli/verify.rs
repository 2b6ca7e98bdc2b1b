use std::path::PathBuf;

use tilewise::executor::{
    compare, execute_batched_with, gemm_cto, gemm_dense, gemm_dense_blocked, gemm_tew,
    gemm_tile_sparse, GemmOutput, Strategy,
};
use tilewise::formats::{decode_cto, read_cto};
use tilewise::synth::gaussian;
use tilewise::{tgm, DenseMatrix, TileConfig};

use super::io::{activations, parse_dims, read_overlay, read_plan};
use super::{invalid, CliResult, Failure};

pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Unpruned weights in TGM format.
    #[arg(long, value_name = "PATH")]
    source: Option<PathBuf>,
    /// Regenerate unpruned Gaussian KxN weights from --seed.
    #[arg(long, value_name = "KxN", value_parser = parse_dims, conflicts_with = "source")]
    synthetic: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    plan: PathBuf,
    #[arg(long, value_name = "PATH")]
    cto: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    /// Masked weights; used as the oracle weights instead of plan mask x source.
    #[arg(long, value_name = "PATH")]
    masked: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    a: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    a_seed: u64,
    #[arg(long, default_value_t = 4)]
    workers: usize,
}

/// First row-major position whose normwise error exceeds the tolerance.
fn first_over(actual: &DenseMatrix<f64>, expected: &DenseMatrix<f64>) -> Option<(usize, usize)> {
    let scale = expected.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let cols = expected.cols();
    actual
        .data()
        .iter()
        .zip(expected.data())
        .position(|(a, e)| (a - e).abs() / scale > TOLERANCE || (a - e).is_nan())
        .map(|i| (i / cols, i % cols))
}

struct Check {
    name: &'static str,
    error: f64,
    first: Option<(usize, usize)>,
}

fn check(
    name: &'static str,
    actual: &DenseMatrix<f64>,
    expected: &DenseMatrix<f64>,
) -> CliResult<Check> {
    let cmp = compare(actual, expected)?;
    Ok(Check {
        name,
        error: cmp.max_relative_error,
        first: first_over(actual, expected),
    })
}

fn require_identical(name: &str, x: &GemmOutput, y: &GemmOutput) -> CliResult<()> {
    if x.bit_identical(y) {
        return Ok(());
    }
    let at = if x.condensed.dims() == y.condensed.dims() {
        compare(&x.condensed, &y.condensed)?.first_difference
    } else {
        None
    };
    Err(Failure::Mismatch(format!(
        "{name} differs bitwise from the tile path{}",
        at.map(|(i, j)| format!(" at condensed ({i}, {j})"))
            .unwrap_or_default()
    )))
}

pub fn run(args: Args) -> CliResult<()> {
    let plan = read_plan(&args.plan)?;
    let mask = &plan.element_mask;
    let (k, n) = mask.dims();

    let weights = match (&args.masked, &args.source, args.synthetic) {
        (Some(p), _, _) => {
            let w = tgm::read(p)?;
            if w.dims() != (k, n) {
                return Err(invalid(format!(
                    "masked weights are {:?}, plan is {k}x{n}",
                    w.dims()
                )));
            }
            if let Some((r, c)) = mask
                .pruned_positions()
                .into_iter()
                .find(|&(r, c)| w.get(r, c) != 0.0)
            {
                return Err(Failure::Tool(tilewise::Error::ContractViolation(format!(
                    "masked weights are nonzero at pruned position ({r}, {c})"
                ))));
            }
            w
        }
        (None, Some(p), _) => mask.apply(&tgm::read(p)?)?,
        (None, None, Some((rk, rn))) => mask.apply(&gaussian(rk, rn, args.seed)?)?,
        (None, None, None) => return Err(invalid("give --masked, --source or --synthetic")),
    };
    let a = activations(args.a.as_deref(), args.m, args.a_seed, k)?;
    let oracle = gemm_dense(&a, &weights)?;

    let mut checks = Vec::new();
    match &args.cto {
        Some(path) => {
            if !plan.pattern.is_tiled() {
                return Err(invalid(format!(
                    "{} plans have no CTO encoding",
                    plan.pattern
                )));
            }
            let enc = read_cto(path)?;
            let tiles = decode_cto(&enc)?;
            if tiles.original_dims() != (k, n) {
                return Err(invalid(format!(
                    "encoding is {:?}, plan is {k}x{n}",
                    tiles.original_dims()
                )));
            }
            let tile = gemm_tile_sparse(&a, &tiles)?;
            let cto = gemm_cto(&a, &enc)?;
            let (batched, _) =
                execute_batched_with(&a, &tiles, args.workers.max(1), Strategy::Lpt)?;
            require_identical("cto path", &tile, &cto)?;
            require_identical("batched path", &tile, &batched)?;

            let overlay = args.overlay.as_deref().map(read_overlay).transpose()?;
            let mut tile_weights = weights.clone();
            if let Some(ov) = &overlay {
                for (r, c, _) in ov.entries() {
                    tile_weights.set(r, c, 0.0);
                }
                let tew = gemm_tew(&a, &tiles, ov)?;
                checks.push(check("tew", &tew.expand(), &oracle)?);
            }
            let tile_oracle = gemm_dense(&a, &tile_weights)?;
            checks.push(check("tile", &tile.expand(), &tile_oracle)?);
            checks.push(check("cto", &cto.expand(), &tile_oracle)?);
            checks.push(check("batched", &batched.expand(), &tile_oracle)?);
        }
        None => {
            if args.overlay.is_some() {
                return Err(invalid("--overlay needs --cto"));
            }
            let blocked = gemm_dense_blocked(&a, &weights, TileConfig::new(7, 5)?)?;
            checks.push(check("masked-blocked", &blocked, &oracle)?);
        }
    }

    let mut worst = 0.0f64;
    for c in &checks {
        println!("{:<15} max relative error {:.3e}", c.name, c.error);
        worst = worst.max(c.error);
    }
    println!("max relative error {worst:.3e}");
    if let Some(bad) = checks.iter().find(|c| c.first.is_some()) {
        let (i, j) = bad.first.unwrap_or_default();
        return Err(Failure::Mismatch(format!(
            "{} path exceeds {TOLERANCE:e} first at ({i}, {j})",
            bad.name
        )));
    }
    Ok(())
}
