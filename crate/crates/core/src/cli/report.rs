use std::path::PathBuf;

use tilewise::formats::{decode_cto, read_cto};
use tilewise::metrics::{report, Representation};

use super::io::{read_overlay, read_plan, write_json};
use super::{invalid, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "PATH")]
    plan: PathBuf,
    /// Encoding of a tile-wise plan; without it FLOPs are counted from the mask.
    #[arg(long, value_name = "PATH")]
    cto: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    overlay: Option<PathBuf>,
    /// Activation rows.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Column tile width for mask-only accounting.
    #[arg(long, default_value_t = 32)]
    g: usize,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult<()> {
    let plan = read_plan(&args.plan)?;
    let tiles = args
        .cto
        .as_deref()
        .map(|p| read_cto(p).and_then(|c| decode_cto(&c)))
        .transpose()?;
    let overlay = args.overlay.as_deref().map(read_overlay).transpose()?;
    let repr = match &tiles {
        Some(tiles) => Representation::Tiled {
            tiles,
            overlay: overlay.as_ref(),
        },
        None if overlay.is_some() => return Err(invalid("--overlay needs --cto")),
        None => Representation::Masked { g: args.g },
    };
    let r = report(&plan, repr, args.m)?;
    match &args.out {
        Some(path) => write_json(path, &r)?,
        None => println!("{}", r.to_json()?),
    }
    Ok(())
}
