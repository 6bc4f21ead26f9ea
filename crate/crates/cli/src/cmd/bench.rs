use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dynoct::benchgen::{run_bench, Distribution, Structure};
use dynoct::OctreeConfig;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, output};
use crate::manifest::RunManifest;

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    /// varying, stepwise, exponential, multimodal or wave
    #[arg(long)]
    pub dist: String,
    /// Fraction of the reference point counts, in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,
    /// Octree leaf parameter; repeat to compare several.
    #[arg(long = "K", default_values_t = [10usize])]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Neighbor-list cutoff distance.
    #[arg(long, default_value_t = 2.0)]
    pub cutoff: f64,
    #[arg(long, env = "DYNOCT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Also time the brute-force flat baseline.
    #[arg(long)]
    pub flat: bool,
    /// Points per step for the wave distribution.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const HEADER: &str = "structure,distribution,step,build_s,update_s,nb_s,peak_mem_mb,avg_mem_mb";

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let manifest = RunManifest::start("bench", args, Some(args.seed))?;
    let dist: Distribution = args.dist.parse()?;
    let mut structures = Vec::new();
    for &k in &args.k {
        structures.push(Structure::Octree(OctreeConfig::new(k, args.alpha)?));
    }
    if args.flat {
        structures.push(Structure::FlatOracle);
    }
    if structures.is_empty() {
        return Err(CliError::input("no structures selected"));
    }
    let series = dist.generate(args.seed, args.scale, args.n)?;
    let records = run_bench(&series, &structures, args.cutoff)?;

    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{HEADER}")?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in &records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.structure,
            r.distribution,
            r.step,
            num(r.build_s),
            num(r.update_s),
            num(r.nb_s),
            opt(r.peak_mem_mb),
            opt(r.avg_mem_mb)
        )?;
    }
    out.flush()?;
    manifest.finish(args.out.as_deref())
}
