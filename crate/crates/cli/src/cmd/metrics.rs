use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dynoct::metrics::{
    neighborhood_distortion, neighborhood_jaccard, trajectory_curvature, PairedPointSets, Trajectory, DEFAULT_K,
};
use dynoct::{PointId, Vec3};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, output, read_points, read_trajectories};
use crate::manifest::RunManifest;

#[derive(Args, Debug, Serialize)]
pub struct MetricsArgs {
    /// Input-space points `id,x,y,z`.
    #[arg(long, requires = "z")]
    pub x: Option<PathBuf>,
    /// Latent-space points `id,x,y,z`, same ids as `--x`.
    #[arg(long, requires = "x")]
    pub z: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Trajectories `point_id,t,x,y,z`.
    #[arg(long)]
    pub traj: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Default)]
struct Row {
    distortion: Option<f64>,
    jaccard: Option<f64>,
    curvature: Option<f64>,
}

fn sorted(mut pts: Vec<(PointId, Vec3)>) -> Vec<(PointId, Vec3)> {
    pts.sort_by_key(|e| e.0);
    pts
}

pub fn run(args: &MetricsArgs) -> CliResult<()> {
    let manifest = RunManifest::start("metrics", args, None)?;
    if args.x.is_none() && args.traj.is_none() {
        return Err(CliError::input("give --x/--z, --traj, or both"));
    }
    let mut rows: BTreeMap<PointId, Row> = BTreeMap::new();
    let mut means = Row::default();

    if let (Some(xp), Some(zp)) = (&args.x, &args.z) {
        let x = sorted(read_points(xp)?);
        let z = sorted(read_points(zp)?);
        if x.iter().map(|e| e.0).ne(z.iter().map(|e| e.0)) {
            return Err(CliError::input("--x and --z must contain the same ids"));
        }
        if x.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CliError::input("duplicate ids in --x"));
        }
        let pairs = PairedPointSets::new(x.iter().map(|e| e.1).collect(), z.iter().map(|e| e.1).collect(), args.k)?;
        let distortion = neighborhood_distortion(&pairs).map_err(|e| match e {
            dynoct::Error::Degenerate { index, reason } => CliError::input(format!("point {}: {reason}", x[index].0)),
            other => other.into(),
        })?;
        let jaccard = neighborhood_jaccard(&pairs)?;
        for (i, (id, _)) in x.iter().enumerate() {
            let row = rows.entry(*id).or_default();
            row.distortion = Some(distortion.values[i]);
            row.jaccard = Some(jaccard.values[i]);
        }
        means.distortion = Some(distortion.mean);
        means.jaccard = Some(jaccard.mean);
    }
    if let Some(tp) = &args.traj {
        let grouped = read_trajectories(tp)?;
        let ids: Vec<PointId> = grouped.keys().copied().collect();
        let traj = Trajectory::new(grouped.into_values().collect())?;
        let curvature = trajectory_curvature(&traj);
        for (id, v) in ids.iter().zip(&curvature.values) {
            rows.entry(*id).or_default().curvature = Some(*v);
        }
        means.curvature = Some(curvature.mean);
    }

    let mut out = output(args.out.as_deref())?;
    let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
    writeln!(out, "id,distortion,jaccard,curvature")?;
    for (id, r) in &rows {
        writeln!(out, "{id},{},{},{}", cell(r.distortion), cell(r.jaccard), cell(r.curvature))?;
    }
    writeln!(out, "mean,{},{},{}", cell(means.distortion), cell(means.jaccard), cell(means.curvature))?;
    out.flush()?;
    manifest.finish(args.out.as_deref())
}
