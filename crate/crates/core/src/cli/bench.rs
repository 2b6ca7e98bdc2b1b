use std::io;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use tilewise::executor::{execute_batched_tew, execute_batched_with, gemm_dense};
use tilewise::metrics::{report, Representation};
use tilewise::patterns::Pattern;
use tilewise::scheduler::{run_schedule, LayerSet, NoOpFineTune, PruneSchedule};
use tilewise::synth::gaussian;

use super::exec::StrategyArg;
use super::io::parse_list;
use super::{invalid, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Square problem sizes, M = K = N.
    #[arg(long, default_value = "128,256")]
    sizes: String,
    #[arg(long, default_value = "ew,vw,bw,tw,tew,tvw")]
    patterns: String,
    #[arg(long, default_value = "0.5,0.75,0.9")]
    sparsities: String,
    #[arg(long, default_value_t = 32)]
    g: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value = "lpt")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    size: usize,
    pattern: Pattern,
    sparsity: f64,
    achieved: f64,
    workers: usize,
    flops: u64,
    flop_reduction: f64,
    wall_ms: f64,
    imbalance: f64,
}

fn measure(size: usize, pattern: Pattern, s: f64, args: &Args) -> CliResult<Row> {
    let w = gaussian(size, size, args.seed)?;
    let a = gaussian(size, size, args.seed.wrapping_add(1))?;
    let sched = PruneSchedule {
        g: args.g,
        delta: if pattern == Pattern::Tew {
            args.delta
        } else {
            0.0
        },
        ..PruneSchedule::single(pattern, s)
    };
    let outcome = run_schedule(LayerSet::single("bench", w), &sched, &mut NoOpFineTune)?;
    let layer = &outcome.layers[0];

    let start = Instant::now();
    let (repr, imbalance) = match (&layer.tiles, &layer.overlay) {
        (Some(tiles), ov) => {
            let strategy = args.strategy.into();
            let (_, trace) = match ov {
                Some(ov) => execute_batched_tew(&a, tiles, ov, args.workers, strategy)?,
                None => execute_batched_with(&a, tiles, args.workers, strategy)?,
            };
            (
                Representation::Tiled {
                    tiles,
                    overlay: ov.as_ref(),
                },
                Some(trace.imbalance),
            )
        }
        (None, _) => {
            gemm_dense(&a, &layer.weights)?;
            (Representation::Masked { g: args.g }, None)
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let r = report(&layer.plan, repr, size)?;
    Ok(Row {
        size,
        pattern,
        sparsity: s,
        achieved: r.achieved,
        workers: args.workers,
        flops: r.sparse_flops,
        flop_reduction: r.flop_reduction,
        wall_ms,
        imbalance: imbalance.unwrap_or(r.imbalance),
    })
}

pub fn run(args: Args) -> CliResult<()> {
    if args.workers == 0 {
        return Err(invalid("--workers must be positive"));
    }
    let sizes: Vec<usize> = parse_list(&args.sizes)?;
    let patterns: Vec<Pattern> = parse_list(&args.patterns)?;
    let sparsities: Vec<f64> = parse_list(&args.sparsities)?;
    if sizes.contains(&0) {
        return Err(invalid("sizes must be positive"));
    }

    let sink: Box<dyn io::Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(io::stdout()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    for &size in &sizes {
        for &pattern in &patterns {
            for &s in &sparsities {
                if pattern == Pattern::Tvw && s < 0.5 {
                    eprintln!("skipping tvw at sparsity {s}: 2:4 needs at least 0.5");
                    continue;
                }
                csv.serialize(measure(size, pattern, s, &args)?)?;
            }
        }
    }
    csv.flush()?;
    eprintln!("wall_ms is measured on this machine and is not comparable across hosts");
    Ok(())
}
