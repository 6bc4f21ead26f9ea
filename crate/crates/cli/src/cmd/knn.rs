use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use dynoct::knn::{gaussian_blobs, Classifier, LabeledPoint};
use dynoct::Aabb;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, output, read_config, read_labeled};
use crate::manifest::RunManifest;

#[derive(Args, Debug, Serialize)]
pub struct KnnArgs {
    /// Training points `id,x,y,z,label`; synthetic blobs when omitted.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test points `id,x,y,z,label`; synthetic blobs when omitted.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub batch_size: usize,
    /// Synthetic training set size.
    #[arg(long, default_value_t = 30_000)]
    pub n_train: usize,
    /// Synthetic test set size.
    #[arg(long, default_value_t = 3_000)]
    pub n_test: usize,
    #[arg(long, env = "DYNOCT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Final predictions as `id,predicted,label`.
    #[arg(long)]
    pub predictions_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn initial_bounds(points: &[LabeledPoint]) -> Aabb {
    Aabb::from_points(points.iter().map(|p| &p.pos)).map_or_else(Aabb::unit, |b| b.padded(0.0))
}

pub fn run(args: &KnnArgs) -> CliResult<()> {
    let manifest = RunManifest::start("knn", args, Some(args.seed))?;
    if args.batch_size == 0 {
        return Err(CliError::input("--batch-size must be at least 1"));
    }
    let train = match &args.train {
        Some(p) => read_labeled(p)?,
        None => gaussian_blobs(args.n_train, args.seed, 0),
    };
    let test = match &args.test {
        Some(p) => read_labeled(p)?,
        None => gaussian_blobs(args.n_test, args.seed.wrapping_add(1), 1 << 40),
    };
    if train.is_empty() || test.is_empty() {
        return Err(CliError::input("training and test sets must be non-empty"));
    }
    let mut clf = Classifier::new(args.k, read_config(args.config.as_deref())?, initial_bounds(&train))?;

    let mut out = output(args.out.as_deref())?;
    writeln!(out, "batch_index,update_ms,query_ms,accuracy")?;
    let mut predictions: Vec<u32> = Vec::new();
    for (b, batch) in train.chunks(args.batch_size).enumerate() {
        let start = Instant::now();
        clf.add_batch(batch)?;
        let update_ms = start.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        predictions = test.iter().map(|p| clf.classify(p.pos)).collect::<Result<_, _>>()?;
        let query_ms = start.elapsed().as_secs_f64() * 1e3;
        let correct = predictions.iter().zip(&test).filter(|(y, p)| **y == p.label).count();
        let accuracy = correct as f64 / test.len() as f64;
        writeln!(out, "{b},{},{},{}", num(update_ms), num(query_ms), num(accuracy))?;
    }
    out.flush()?;
    if let Some(path) = &args.predictions_out {
        let mut w = output(Some(path))?;
        writeln!(w, "id,predicted,label")?;
        for (p, y) in test.iter().zip(&predictions) {
            writeln!(w, "{},{},{}", p.id, y, p.label)?;
        }
        w.flush()?;
    }
    manifest.finish(args.out.as_deref())
}
