use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use tilewise::formats::{encode_cto, geometry, write_cto};
use tilewise::metrics::{report_layers, Representation};
use tilewise::patterns::Pattern;
use tilewise::scheduler::{run_schedule, Layer, LayerSet, NoOpFineTune, PruneSchedule};
use tilewise::scoring::ScoreKind;
use tilewise::synth::gaussian;
use tilewise::tgm;

use super::io::{parse_dims, write_json};
use super::{invalid, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Weight matrix in TGM format; repeat for several layers.
    #[arg(long = "input", value_name = "PATH")]
    inputs: Vec<PathBuf>,
    /// Gradient for the matching --input, needed by taylor scores.
    #[arg(long = "gradient", value_name = "PATH")]
    gradients: Vec<PathBuf>,
    /// Use one Gaussian KxN matrix named `synthetic` instead of --input.
    #[arg(long, value_name = "KxN", value_parser = parse_dims, conflicts_with = "inputs")]
    synthetic: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule JSON; replaces the pattern flags below.
    #[arg(long, value_name = "PATH")]
    schedule: Option<PathBuf>,
    #[arg(long)]
    pattern: Option<Pattern>,
    /// Final sparsity S.
    #[arg(long)]
    sparsity: Option<f64>,
    /// Stage step s_s; defaults to a single stage.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 32)]
    g: usize,
    /// Extra TW sparsity restored as an overlay (TEW).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 4)]
    vector_len: usize,
    /// BW block edge; defaults to g.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, default_value = "magnitude")]
    score: String,
    /// Rank units across all layers instead of per layer.
    #[arg(long)]
    global: bool,
    /// Activation rows assumed by the written report.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn schedule(args: &Args) -> CliResult<PruneSchedule> {
    if let Some(path) = &args.schedule {
        let s: PruneSchedule = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(s);
    }
    let pattern = args
        .pattern
        .ok_or_else(|| invalid("give --schedule or --pattern"))?;
    let target = args
        .sparsity
        .ok_or_else(|| invalid("give --schedule or --sparsity"))?;
    let score = match args.score.as_str() {
        "magnitude" => ScoreKind::Magnitude,
        "taylor" => ScoreKind::Taylor,
        other => return Err(invalid(format!("unknown score `{other}`"))),
    };
    Ok(PruneSchedule {
        step: args.step.unwrap_or(target),
        g: args.g,
        delta: args.delta,
        score,
        global: args.global,
        vector_len: args.vector_len,
        block: args.block,
        ..PruneSchedule::single(pattern, target)
    })
}

fn layer_name(path: &Path) -> CliResult<String> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| invalid(format!("cannot name a layer after {}", path.display())))?;
    Ok(stem.strip_suffix(".masked").unwrap_or(stem).to_string())
}

fn layers(args: &Args) -> CliResult<LayerSet> {
    if let Some((k, n)) = args.synthetic {
        if !args.gradients.is_empty() {
            return Err(invalid("--gradient needs --input"));
        }
        return Ok(LayerSet::single("synthetic", gaussian(k, n, args.seed)?));
    }
    if args.inputs.is_empty() {
        return Err(invalid("give --input or --synthetic"));
    }
    if !args.gradients.is_empty() && args.gradients.len() != args.inputs.len() {
        return Err(invalid("give one --gradient per --input or none"));
    }
    let mut out = Vec::with_capacity(args.inputs.len());
    for (i, path) in args.inputs.iter().enumerate() {
        out.push(Layer {
            name: layer_name(path)?,
            weights: tgm::read(path)?,
            gradient: args.gradients.get(i).map(tgm::read).transpose()?,
        });
    }
    Ok(LayerSet::new(out)?)
}

pub fn run(args: Args) -> CliResult<()> {
    let sched = schedule(&args)?;
    sched.validate()?;
    let layers = layers(&args)?;
    let outcome = run_schedule(layers, &sched, &mut NoOpFineTune)?;

    fs::create_dir_all(&args.out)?;
    let dir = &args.out;
    for l in &outcome.layers {
        let base = |ext: &str| dir.join(format!("{}.{ext}", l.name));
        write_json(&base("plan.json"), &l.plan)?;
        tgm::write(base("masked.tgm"), &l.weights)?;
        if let Some(tiles) = &l.tiles {
            let cto = encode_cto(tiles);
            write_cto(base("cto"), &cto)?;
            write_json(&base("cto.json"), &geometry(&cto))?;
        }
        if let Some(ov) = &l.overlay {
            write_json(&base("overlay.json"), ov)?;
        }
        println!(
            "{}: {} target {:.4} achieved {:.6}",
            l.name, l.plan.pattern, l.plan.target_sparsity, l.plan.achieved_sparsity
        );
    }
    outcome.write_stage_log(BufWriter::new(File::create(dir.join("stages.jsonl"))?))?;

    let g = sched.g;
    let entries: Vec<(&str, _, _)> = outcome
        .layers
        .iter()
        .map(|l| {
            let repr = match &l.tiles {
                Some(tiles) => Representation::Tiled {
                    tiles,
                    overlay: l.overlay.as_ref(),
                },
                None => Representation::Masked { g },
            };
            (l.name.as_str(), &l.plan, repr)
        })
        .collect();
    let report = report_layers(&entries, args.m)?;
    write_json(&dir.join("report.json"), &report)?;
    println!(
        "overall achieved {:.6}, flop reduction {:.6}",
        report.achieved, report.flop_reduction
    );
    Ok(())
}
