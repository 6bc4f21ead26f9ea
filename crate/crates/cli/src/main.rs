//! `dynoct`: benchmarks, SVGD, KNN, vector index and metrics from the
//! command line.

mod cmd;
mod error;
mod io;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "dynoct", version, about = "Dynamic (K, alpha)-admissible octree toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time octree and flat baselines on a generated time-varying cloud.
    Bench(cmd::bench::BenchArgs),
    /// Run Stein variational gradient descent on a preset target.
    Svgd(cmd::svgd::SvgdArgs),
    /// Train a KNN classifier in batches and track accuracy.
    Knn(cmd::knn::KnnArgs),
    /// Build a hybrid vector index and answer top-k queries.
    Index(cmd::index::IndexArgs),
    /// Neighborhood distortion, Jaccard similarity and trajectory curvature.
    Metrics(cmd::metrics::MetricsArgs),
    /// Run the admissibility and oracle-equivalence suite.
    Validate(cmd::validate::ValidateArgs),
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Bench(a) => cmd::bench::run(a),
        Command::Svgd(a) => cmd::svgd::run(a),
        Command::Knn(a) => cmd::knn::run(a),
        Command::Index(a) => cmd::index::run(a),
        Command::Metrics(a) => cmd::metrics::run(a),
        Command::Validate(a) => cmd::validate::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
