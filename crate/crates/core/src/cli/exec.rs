use std::path::PathBuf;

use tilewise::executor::{execute_batched_tew, execute_batched_with, Strategy};
use tilewise::formats::{decode_cto, read_cto};
use tilewise::patterns::SparseOverlay;
use tilewise::{tgm, DenseMatrix};

use super::io::{activations, read_overlay, write_json};
use super::{invalid, CliResult};

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum StrategyArg {
    Lpt,
    RoundRobin,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Lpt => Strategy::Lpt,
            StrategyArg::RoundRobin => Strategy::RoundRobin,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    cto: PathBuf,
    /// TEW overlay JSON written by `prune`.
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    /// Activations in TGM format.
    #[arg(long, value_name = "PATH")]
    a: Option<PathBuf>,
    /// Rows of Gaussian activations, used instead of --a.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    a_seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value = "lpt")]
    strategy: StrategyArg,
    /// Full M x N product, stored as f32 TGM.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Per-tile and per-worker work as JSON.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    if args.workers == 0 {
        return Err(invalid("--workers must be positive"));
    }
    let tiles = decode_cto(&read_cto(&args.cto)?)?;
    let overlay: Option<SparseOverlay> = args.overlay.as_deref().map(read_overlay).transpose()?;
    let k = tiles.original_dims().0;
    let a = activations(args.a.as_deref(), args.m, args.a_seed, k)?;
    let strategy = args.strategy.into();
    let (out, trace) = match &overlay {
        Some(ov) => execute_batched_tew(&a, &tiles, ov, args.workers, strategy)?,
        None => execute_batched_with(&a, &tiles, args.workers, strategy)?,
    };
    if let Some(path) = &args.out {
        let full = out.expand();
        let c = DenseMatrix::new(
            full.rows(),
            full.cols(),
            full.data().iter().map(|&v| v as f32).collect(),
        )?;
        tgm::write(path, &c)?;
    }
    if let Some(path) = &args.trace {
        write_json(path, &trace)?;
    }
    println!(
        "M={} K={} N={} tiles={} flops={} imbalance={:.4}",
        a.rows(),
        k,
        tiles.original_dims().1,
        tiles.tiles().len(),
        trace.flops,
        trace.imbalance
    );
    Ok(())
}
