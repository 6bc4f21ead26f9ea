use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dynoct::oracle::{brute_knn, brute_pairs, brute_range, FlatPointSet};
use dynoct::workload::{boundary_cloud, clustered_cloud, uniform_cloud, MixedOps};
use dynoct::{Aabb, Octree, OctreeConfig, PointId, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::output;
use crate::manifest::RunManifest;

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// Mixed operations per (K, alpha) setting.
    #[arg(long, default_value_t = 20_000)]
    pub ops: usize,
    /// Points per cloud in the oracle-equivalence checks.
    #[arg(long, default_value_t = 2_000)]
    pub points: usize,
    /// Random queries per cloud.
    #[arg(long, default_value_t = 50)]
    pub queries: usize,
    #[arg(long, env = "DYNOCT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Check {
    name: String,
    failures: Vec<String>,
}

fn admissibility(k: usize, alpha: f64, ops: usize, seed: u64) -> CliResult<Check> {
    let mut tree = Octree::new(OctreeConfig::new(k, alpha)?, Aabb::unit())?;
    let mut flat = FlatPointSet::new();
    let mut failures = Vec::new();
    let every = (ops / 10).max(1);
    for (i, op) in MixedOps::new(seed).take(ops).enumerate() {
        op.apply_to_tree(&mut tree)?;
        op.apply_to_flat(&mut flat)?;
        if (i + 1) % every == 0 || i + 1 == ops {
            let report = tree.validate_admissibility();
            failures.extend(report.violations.iter().take(5).map(|v| format!("after op {}: {v}", i + 1)));
        }
    }
    if tree.points() != flat.entries() {
        failures.push("point set differs from the flat oracle".into());
    }
    Ok(Check { name: format!("admissibility K={k} alpha={alpha} ops={ops}"), failures })
}

fn equivalence(name: &str, cloud: &[(PointId, Vec3)], queries: usize, seed: u64) -> CliResult<Check> {
    let flat = FlatPointSet::from_entries(cloud.iter().copied())?;
    let tree = Octree::from_points(OctreeConfig::default(), cloud)?;
    let bounds = tree.bounds();
    let diag = bounds.diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for qi in 0..queries {
        let q = [0, 1, 2].map(|a| rng.random_range(bounds.min[a]..=bounds.max[a]));
        let k = rng.random_range(1..=32);
        if tree.k_nearest(q, k) != brute_knn(&flat, q, k) {
            failures.push(format!("k_nearest query {qi}"));
        }
        let r = diag * rng.random_range(0.001..0.1);
        if tree.range_query(q, r)? != brute_range(&flat, q, r) {
            failures.push(format!("range_query query {qi}"));
        }
    }
    for f in [0.005, 0.01, 0.02] {
        if tree.build_neighbor_lists(diag * f)? != brute_pairs(&flat, diag * f) {
            failures.push(format!("neighbor lists at {f} x diagonal"));
        }
    }
    Ok(Check { name: format!("oracle equivalence ({name}, n={})", cloud.len()), failures })
}

pub fn run(args: &ValidateArgs) -> CliResult<()> {
    let manifest = RunManifest::start("validate", args, Some(args.seed))?;
    let mut checks = Vec::new();
    for k in [10, 100] {
        for alpha in [1.0, 2.0] {
            checks.push(admissibility(k, alpha, args.ops, args.seed)?);
        }
    }
    let clouds = [
        ("uniform", uniform_cloud(args.points, args.seed)),
        ("clustered", clustered_cloud(args.points, args.seed)),
        ("boundary", boundary_cloud(args.points, args.seed)),
    ];
    for (name, cloud) in &clouds {
        checks.push(equivalence(name, cloud, args.queries, args.seed)?);
    }

    let mut out = output(args.out.as_deref())?;
    let mut failed = 0;
    for c in &checks {
        let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {}", c.name)?;
        for f in &c.failures {
            writeln!(out, "    {f}")?;
        }
        failed += usize::from(!c.failures.is_empty());
    }
    writeln!(out, "{} of {} checks passed", checks.len() - failed, checks.len())?;
    out.flush()?;
    manifest.finish(args.out.as_deref())?;
    if failed > 0 {
        return Err(CliError::Invariant(format!("{failed} validation checks failed")));
    }
    Ok(())
}
