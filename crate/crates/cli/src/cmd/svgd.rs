use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use dynoct::svgd::{run_svgd, Bandwidth, Normalization, SvgdMode, SvgdOptions, TargetDistribution};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, output, read_config};
use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    Octree,
}

/// `median`, a positive number, or `neighbors:<m>` for a bandwidth giving
/// `m` neighbors per particle on average.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BandwidthArg(#[serde(skip)] pub Bandwidth, pub f64);

impl FromStr for BandwidthArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "median" {
            return Ok(BandwidthArg(Bandwidth::Median, 0.0));
        }
        if let Some(m) = s.strip_prefix("neighbors:") {
            let m: f64 = m.parse().map_err(|_| format!("bad neighbor count {m:?}"))?;
            return Ok(BandwidthArg(Bandwidth::MeanNeighbors(m), m));
        }
        let h: f64 = s.parse().map_err(|_| format!("expected median, neighbors:<m> or a number, got {s:?}"))?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(format!("bandwidth must be positive, got {h}"));
        }
        Ok(BandwidthArg(Bandwidth::Fixed(h), h))
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SvgdArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = Mode::Octree)]
    pub mode: Mode,
    /// gauss or mixture2
    #[arg(long, default_value = "mixture2")]
    pub target: String,
    #[arg(long, env = "DYNOCT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value = "median")]
    #[serde(serialize_with = "bandwidth_text")]
    pub bandwidth: BandwidthArg,
    /// Octree mode: include the self term and divide by n, as the naive sum does.
    #[arg(long)]
    pub compat_norm: bool,
    /// Rebuild the octree every this many iterations instead of updating it.
    #[arg(long)]
    pub rebuild_every: Option<usize>,
    /// Octree configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Final particle positions as `id,x,y,z`.
    #[arg(long)]
    pub positions_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn bandwidth_text<S: serde::Serializer>(b: &BandwidthArg, s: S) -> Result<S::Ok, S::Error> {
    match b.0 {
        Bandwidth::Median => s.serialize_str("median"),
        Bandwidth::Fixed(h) => s.serialize_str(&h.to_string()),
        Bandwidth::MeanNeighbors(m) => s.serialize_str(&format!("neighbors:{m}")),
    }
}

pub fn run(args: &SvgdArgs) -> CliResult<()> {
    let manifest = RunManifest::start("svgd", args, Some(args.seed))?;
    let target = TargetDistribution::preset(&args.target)?;
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(CliError::input(format!("--eps must be positive, got {}", args.eps)));
    }
    let opts = SvgdOptions {
        n: args.n,
        iterations: args.iters,
        mode: match args.mode {
            Mode::Naive => SvgdMode::Naive,
            Mode::Octree => SvgdMode::Octree,
        },
        seed: args.seed,
        step_size: args.eps,
        bandwidth: args.bandwidth.0,
        normalization: if args.compat_norm { Normalization::Ensemble } else { Normalization::NeighborCount },
        rebuild_every: args.rebuild_every,
        octree: read_config(args.config.as_deref())?,
    };
    let traj = run_svgd(&target, &opts)?;

    let mut out = output(args.out.as_deref())?;
    writeln!(out, "iter,wall_ms,mean_logp")?;
    writeln!(out, "0,0,{}", num(traj.mean_log_density[0]))?;
    for (t, ms) in traj.wall_ms.iter().enumerate() {
        writeln!(out, "{},{},{}", t + 1, num(*ms), num(traj.mean_log_density[t + 1]))?;
    }
    out.flush()?;
    if let Some(path) = &args.positions_out {
        let mut pos = output(Some(path))?;
        writeln!(pos, "id,x,y,z")?;
        for (i, p) in traj.final_positions().iter().enumerate() {
            writeln!(pos, "{i},{},{},{}", num(p[0]), num(p[1]), num(p[2]))?;
        }
        pos.flush()?;
    }
    manifest.finish(args.out.as_deref())
}
