use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dynoct::embed::synthetic::ClusteredVectors;
use dynoct::embed::{EmbeddingStore, HybridIndex, IndexOptions, SearchParams};
use dynoct::PointId;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{num, output, read_config, read_vectors};
use crate::manifest::RunManifest;

#[derive(Args, Debug, Serialize)]
pub struct IndexArgs {
    /// Vector dimension (checked against the files when they are given).
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 8)]
    pub clusters: usize,
    #[arg(long, default_value_t = 3)]
    pub probe: usize,
    #[arg(long, default_value_t = 10)]
    pub multiplier: usize,
    #[arg(long, default_value_t = 10)]
    pub topk: usize,
    /// Indexed vectors `id,v0,...`; synthetic clustered vectors when omitted.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Query vectors `id,v0,...`; synthetic queries when omitted.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Synthetic index size.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Synthetic query count.
    #[arg(long, default_value_t = 100)]
    pub n_queries: usize,
    #[arg(long, env = "DYNOCT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn check_dim(expected: usize, got: usize, what: &str) -> CliResult<()> {
    if expected == got {
        Ok(())
    } else {
        Err(CliError::input(format!("{what} have dimension {got}, --dim is {expected}")))
    }
}

pub fn run(args: &IndexArgs) -> CliResult<()> {
    let manifest = RunManifest::start("index", args, Some(args.seed))?;
    let synthetic = ClusteredVectors::new(args.dim, args.clusters, args.seed);
    let (store, synthetic_queries) = match &args.vectors {
        Some(path) => {
            let (dim, rows) = read_vectors(path)?;
            check_dim(args.dim, dim, "vectors")?;
            let mut store = EmbeddingStore::new(dim)?;
            for (id, v) in rows {
                store.insert(id, &v)?;
            }
            (store, Vec::new())
        }
        None => synthetic.generate(args.n, if args.queries.is_none() { args.n_queries } else { 0 })?,
    };
    let queries: Vec<(PointId, Vec<f64>)> = match &args.queries {
        Some(path) => {
            let (dim, rows) = read_vectors(path)?;
            check_dim(args.dim, dim, "queries")?;
            rows
        }
        None if args.vectors.is_none() => {
            synthetic_queries.into_iter().enumerate().map(|(i, v)| (PointId(i as u64), v)).collect()
        }
        None => return Err(CliError::input("--queries is required with --vectors")),
    };
    if queries.is_empty() {
        return Err(CliError::input("no queries"));
    }

    let opts = IndexOptions {
        num_clusters: args.clusters,
        seed: args.seed,
        octree: read_config(args.config.as_deref())?,
        ..Default::default()
    };
    let index = HybridIndex::build(store, &opts)?;
    let params = SearchParams { probe_clusters: args.probe, candidate_multiplier: args.multiplier };

    let mut out = output(args.out.as_deref())?;
    writeln!(out, "query_id,rank,result_id,distance")?;
    for (qid, q) in &queries {
        for (rank, hit) in index.query(q, args.topk, params)?.iter().enumerate() {
            writeln!(out, "{qid},{},{},{}", rank + 1, hit.id, num(hit.distance))?;
        }
    }
    out.flush()?;
    let vectors: Vec<Vec<f64>> = queries.into_iter().map(|q| q.1).collect();
    let recall = index.recall_at_k(&vectors, args.topk, params)?;
    eprintln!(
        "recall@{} = {recall:.4} (probe={}, multiplier={}, clusters={}, queries={})",
        args.topk,
        args.probe,
        args.multiplier,
        index.num_clusters(),
        vectors.len()
    );
    manifest.finish(args.out.as_deref())
}
