//! `viz`: patch-level visualizations — nearest-neighbor patch
//! reconstruction, the uniform-rf control, and rf averaging.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use densecorr::evalviz::{patch_reconstruction, rf_average, uniform_rf_baseline};

use crate::commands::build_db::load_db;
use crate::manifest::Manifest;
use crate::util;

#[derive(Debug, Args)]
pub struct VizArgs {
    #[command(subcommand)]
    pub what: VizCommand,
}

#[derive(Debug, Subcommand)]
pub enum VizCommand {
    /// Replace each center patch by the mean of its k nearest db patches.
    Patches {
        /// Image id to reconstruct.
        #[arg(long)]
        image: String,
        /// Feature layer of the image's grid.
        #[arg(long)]
        layer: String,
        /// Database directory from `build-db`.
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Control: draw replacement patches uniformly from rf-sized
    /// neighborhoods in random db images.
    Uniform {
        #[arg(long)]
        image: String,
        #[arg(long)]
        db: PathBuf,
    },
    /// Average the k nearest receptive-field crops of a seed feature.
    Rfavg {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 500)]
        k: usize,
    },
}

pub fn run(manifest: &Manifest, out_dir: &PathBuf, seed: u64, args: &VizArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    match &args.what {
        VizCommand::Patches { image, layer, db, k } => {
            let database = load_db(db)?;
            let record = manifest.get(image)?;
            let img = util::load_rgb(&record.image_path)?;
            let grid = densecorr::gridgeom::read_grid(
                record
                    .grids
                    .get(layer)
                    .with_context(|| format!("{image:?} has no {layer:?} grid"))?,
            )?;
            let out = patch_reconstruction(&img, &grid, &database, *k)?;
            let path = out_dir.join(format!("{image}.patches_k{k}.png"));
            util::save_png_atomic(&path, &out)?;
            eprintln!("viz patches → {}", path.display());
        }
        VizCommand::Uniform { image, db } => {
            let database = load_db(db)?;
            let record = manifest.get(image)?;
            let img = util::load_rgb(&record.image_path)?;
            let geometry = *database.geometry();
            let out = uniform_rf_baseline(&img, &geometry, &database, seed)?;
            let path = out_dir.join(format!("{image}.uniform_s{seed}.png"));
            util::save_png_atomic(&path, &out)?;
            eprintln!("viz uniform → {}", path.display());
        }
        VizCommand::Rfavg { db, k } => {
            let database = load_db(db)?;
            if database.is_empty() {
                bail!("database is empty");
            }
            // seed feature: a db entry picked by the global --seed
            let idx = (seed as usize) % database.len();
            let (source, _, feature) = database.entry(idx);
            let source = source.to_string();
            let feature = feature.to_vec();
            let out = rf_average(&feature, &database, *k)?;
            let path = out_dir.join(format!("rfavg_{source}_e{idx}_k{k}.png"));
            util::save_png_atomic(&path, &out)?;
            eprintln!("viz rfavg seed entry {idx} ({source}) → {}", path.display());
        }
    }
    Ok(())
}
