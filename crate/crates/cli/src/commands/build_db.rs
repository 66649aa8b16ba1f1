//! `build-db`: assembles a patch database directory — copies of the selected
//! DCFG grids plus a manifest mapping ids to image and grid files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;

use crate::manifest::{Manifest, Split};
use crate::util;

#[derive(Debug, Args)]
pub struct BuildDbArgs {
    /// Feature layer of the grids to index.
    #[arg(long)]
    pub layer: String,
    /// Restrict to one split.
    #[arg(long)]
    pub split: Option<Split>,
    /// Restrict to one category.
    #[arg(long)]
    pub category: Option<String>,
}

pub fn run(manifest: &Manifest, out_dir: &PathBuf, args: &BuildDbArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let records = manifest.select(args.category.as_deref(), args.split);
    let mut lines = String::new();
    let mut count = 0usize;
    for record in records {
        let Some(grid_path) = record.grids.get(&args.layer) else {
            continue;
        };
        let dst = out_dir.join(format!("{}.{}.dcfg", record.image_id, args.layer));
        std::fs::copy(grid_path, &dst)?;
        lines.push_str(&format!(
            "{}\t{}\t{}\n",
            record.image_id,
            record.image_path.canonicalize()?.display(),
            dst.file_name().unwrap().to_string_lossy()
        ));
        count += 1;
    }
    if count == 0 {
        bail!("no grids found for layer {:?}", args.layer);
    }
    util::write_atomic(out_dir.join("db_manifest.tsv"), lines.as_bytes())?;
    eprintln!("build-db: {count} grids → {}", out_dir.display());
    Ok(())
}

/// Loads a database directory built by `build-db` into memory.
pub fn load_db(dir: &Path) -> Result<densecorr::evalviz::PatchDatabase> {
    let manifest = std::fs::read_to_string(dir.join("db_manifest.tsv"))?;
    let mut items = Vec::new();
    for line in manifest.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            bail!("bad db manifest line: {line:?}");
        }
        let image = util::load_rgb(PathBuf::from(fields[1]))?;
        let grid = densecorr::gridgeom::read_grid(dir.join(fields[2]))?;
        items.push((fields[0].to_string(), image, grid));
    }
    Ok(densecorr::evalviz::PatchDatabase::build(items)?)
}
