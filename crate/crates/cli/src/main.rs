//! Batch command-line surface for the dense-correspondence toolkit: wires
//! manifests, feature grids, and annotations through the alignment,
//! classification, prediction, and visualization pipelines.

mod commands;
mod manifest;
mod util;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(
    name = "densecorr",
    about = "Dense correspondence and keypoint toolkit over feature grids",
    version
)]
struct Cli {
    /// Dataset manifest (tab-separated; see README).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Seed for all randomized operations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to DENSECORR_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute dense descriptor grids (and optional global descriptors).
    Features(commands::features::FeaturesArgs),
    /// Align one source/target pair and write flow, warp, and energies.
    Align(commands::align::AlignArgs),
    /// Transfer keypoints onto a target from its warped nearest neighbors.
    Transfer(commands::transfer::TransferArgs),
    /// Train one-vs-all keypoint classifiers (or run a C sweep).
    TrainClassifier(commands::classifier::TrainClassifierArgs),
    /// Evaluate stored classifiers on a split.
    Classify(commands::classifier::ClassifyArgs),
    /// Train sliding-window keypoint detectors with hard negative mining.
    TrainDetector(commands::detector::TrainDetectorArgs),
    /// Predict keypoints with detectors fused with a location prior.
    Predict(commands::detector::PredictArgs),
    /// PCK tables from prediction and truth annotation files.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Assemble a patch database directory from grids.
    BuildDb(commands::build_db::BuildDbArgs),
    /// Patch reconstruction, uniform-rf control, and rf averaging.
    Viz(commands::viz::VizArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("DENSECORR_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building thread pool")?;
    }

    let manifest = cli
        .manifest
        .as_ref()
        .map(Manifest::load)
        .transpose()
        .context("loading manifest")?;
    // absolute out-dir keeps emitted manifests valid from anywhere
    std::fs::create_dir_all(&cli.out_dir)?;
    let cli = Cli {
        out_dir: std::fs::canonicalize(&cli.out_dir)?,
        ..cli
    };
    fn need(m: &Option<Manifest>) -> Result<&Manifest> {
        m.as_ref().context("this command requires --manifest")
    }

    match &cli.command {
        Command::Features(args) => commands::features::run(need(&manifest)?, &cli.out_dir, args),
        Command::Align(args) => commands::align::run(need(&manifest)?, &cli.out_dir, args),
        Command::Transfer(args) => commands::transfer::run(need(&manifest)?, &cli.out_dir, args),
        Command::TrainClassifier(args) => {
            commands::classifier::run_train(need(&manifest)?, &cli.out_dir, args)
        }
        Command::Classify(args) => {
            commands::classifier::run_classify(need(&manifest)?, &cli.out_dir, args)
        }
        Command::TrainDetector(args) => {
            commands::detector::run_train(need(&manifest)?, &cli.out_dir, args)
        }
        Command::Predict(args) => {
            commands::detector::run_predict(need(&manifest)?, &cli.out_dir, args)
        }
        Command::Evaluate(args) => {
            commands::evaluate::run(manifest.as_ref(), &cli.out_dir, args)
        }
        Command::BuildDb(args) => commands::build_db::run(need(&manifest)?, &cli.out_dir, args),
        Command::Viz(args) => commands::viz::run(need(&manifest)?, &cli.out_dir, cli.seed, args),
    }
}
