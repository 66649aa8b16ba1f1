//! `features`: computes dense gradient-orientation descriptor grids (and
//! optionally global descriptors) for every manifest image, writing DCFG
//! files and an updated manifest.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use densecorr::descriptors::{dense_descriptors, DenseDescriptorConfig, GlobalDescriptor};
use densecorr::gridgeom::write_grid;
use densecorr::imgutil::GrayF32;
use rayon::prelude::*;

use crate::manifest::{write_manifest, Manifest};
use crate::util;

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Grid stride in pixels.
    #[arg(long, default_value_t = 8)]
    pub stride: u32,
    /// Descriptor support half-width in pixels.
    #[arg(long, default_value_t = 20)]
    pub radius: u32,
    #[arg(long, default_value_t = 4)]
    pub spatial_bins: usize,
    #[arg(long, default_value_t = 8)]
    pub orientation_bins: usize,
    /// Layer name the grids are stored under in the output manifest.
    #[arg(long, default_value = "dsift")]
    pub layer_name: String,
    /// Rescale each bounding box to this square side before computing
    /// features (0 = use the raw image).
    #[arg(long, default_value_t = 0)]
    pub box_side: u32,
    /// Also write mean-pooled global descriptors for retrieval.
    #[arg(long)]
    pub global: bool,
}

pub fn run(manifest: &Manifest, out_dir: &PathBuf, args: &FeaturesArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let config = DenseDescriptorConfig {
        grid_stride: args.stride,
        radius: args.radius,
        spatial_bins: args.spatial_bins,
        orientation_bins: args.orientation_bins,
    };
    let annotations = if args.box_side > 0 {
        manifest.load_annotations()?
    } else {
        Default::default()
    };

    let results: Vec<Result<(String, PathBuf, Option<PathBuf>)>> = manifest
        .records()
        .par_iter()
        .map(|record| -> Result<(String, PathBuf, Option<PathBuf>)> {
            let gray = util::load_gray_f32(&record.image_path)?;
            let gray = if args.box_side > 0 {
                let set = annotations.get(&record.image_id).with_context(|| {
                    format!("--box-side needs annotations for {:?}", record.image_id)
                })?;
                crop_box(&gray, set.bbox, args.box_side)?
            } else {
                gray
            };
            let grid = dense_descriptors(&gray, &config)
                .with_context(|| format!("features for {:?}", record.image_id))?
                .with_source_id(record.image_id.clone());
            let grid_path = out_dir.join(format!("{}.{}.dcfg", record.image_id, args.layer_name));
            util::write_atomic_with(&grid_path, |tmp| Ok(write_grid(&grid, tmp)?))?;
            let global_path = if args.global {
                let g = GlobalDescriptor::mean_pool(&grid)?;
                let p = out_dir.join(format!("{}.global.dcfg", record.image_id));
                util::write_atomic_with(&p, |tmp| Ok(write_grid(&g.to_grid(), tmp)?))?;
                Some(p)
            } else {
                None
            };
            Ok((record.image_id.clone(), grid_path, global_path))
        })
        .collect();

    let mut failures = Vec::new();
    let mut updated = manifest.records().to_vec();
    for (record, result) in updated.iter_mut().zip(results) {
        match result {
            Ok((_, grid_path, global_path)) => {
                record.grids.insert(args.layer_name.clone(), grid_path);
                if let Some(p) = global_path {
                    record.global_path = Some(p);
                }
            }
            Err(e) => {
                eprintln!("features: {} failed: {e:#}", record.image_id);
                failures.push(record.image_id.clone());
            }
        }
    }
    write_manifest(out_dir.join("manifest.tsv"), &updated)?;
    if !failures.is_empty() {
        bail!("features failed for {} image(s): {}", failures.len(), failures.join(", "));
    }
    Ok(())
}

/// Crops the bounding box (clamped to the image) and rescales it to a
/// `side × side` square.
pub fn crop_box(gray: &GrayF32, bbox: densecorr::evalviz::BoundingBox, side: u32) -> Result<GrayF32> {
    let (w, h) = (gray.width() as f64, gray.height() as f64);
    let x0 = bbox.x.max(0.0).min(w - 1.0) as u32;
    let y0 = bbox.y.max(0.0).min(h - 1.0) as u32;
    let x1 = ((bbox.x + bbox.w).ceil().min(w)) as u32;
    let y1 = ((bbox.y + bbox.h).ceil().min(h)) as u32;
    if x1 <= x0 || y1 <= y0 {
        bail!("empty bounding box after clamping");
    }
    let cropped = image::imageops::crop_imm(gray, x0, y0, x1 - x0, y1 - y0).to_image();
    Ok(image::imageops::resize(
        &cropped,
        side,
        side,
        image::imageops::FilterType::Triangle,
    ))
}
