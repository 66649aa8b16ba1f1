//! `transfer`: keypoint transfer by alignment. Retrieves the target's
//! nearest neighbors by cosine similarity on global descriptors, aligns each
//! neighbor to the target, ranks the alignments by deformation energy, and
//! takes the coordinate-wise median of the top-ranked transferred keypoints.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use densecorr::descriptors::{GlobalDescriptor, NNIndex};
use densecorr::evalviz::{write_annotations, KeypointSet};
use densecorr::flow::{aggregate_median, bp_align, rank_by_deformation, transfer_keypoints};
use densecorr::gridgeom::read_grid;
use rayon::prelude::*;

use crate::commands::align::FlowFlags;
use crate::manifest::Manifest;

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Target image id to predict keypoints for.
    #[arg(long)]
    pub target: String,
    /// Feature layer to align on.
    #[arg(long)]
    pub layer: String,
    /// Neighbors to retrieve and warp.
    #[arg(long, default_value_t = 25)]
    pub k: usize,
    /// Top-ranked alignments aggregated into the median.
    #[arg(long, default_value_t = 5)]
    pub top_n: usize,
    /// Square box side the grids were computed in (0 = raw image frame).
    #[arg(long, default_value_t = 0)]
    pub box_side: u32,
    #[command(flatten)]
    pub flow: FlowFlags,
}

pub fn run(manifest: &Manifest, out_dir: &PathBuf, args: &TransferArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let annotations = manifest.load_annotations()?;
    let target = manifest.get(&args.target)?;

    // retrieval by cosine on global descriptors, excluding the target itself
    let mut index = NNIndex::<f32>::new();
    for record in manifest.records() {
        if record.image_id == args.target {
            continue;
        }
        let Some(path) = &record.global_path else {
            continue;
        };
        let g = GlobalDescriptor::from_grid(&read_grid(path)?)?;
        index.push(record.image_id.clone(), &g.vector)?;
    }
    if args.k > index.len() {
        bail!(
            "k={} exceeds the {} retrievable images in the dataset",
            args.k,
            index.len()
        );
    }
    let target_global_path = target
        .global_path
        .as_ref()
        .context("target has no global descriptor")?;
    let query = GlobalDescriptor::from_grid(&read_grid(target_global_path)?)?;
    let neighbors = index.knn(&query.vector, args.k)?;

    let tgt_grid = crate::util::load_grid_f64(manifest.grid_path(&args.target, &args.layer)?)?;
    let config = args.flow.to_config();

    // align every neighbor to the target and transfer its keypoints
    let aligned: Vec<Result<(f64, KeypointSet)>> = neighbors
        .par_iter()
        .map(|(neighbor_id, _)| -> Result<(f64, KeypointSet)> {
            let src_grid =
                crate::util::load_grid_f64(manifest.grid_path(neighbor_id, &args.layer)?)?;
            let (flow, energy) = bp_align(&src_grid, &tgt_grid, &config)
                .with_context(|| format!("aligning {neighbor_id} → {}", args.target))?;
            let kps = annotations
                .get(neighbor_id)
                .with_context(|| format!("no annotations for neighbor {neighbor_id:?}"))?;
            let kps = if args.box_side > 0 {
                kps.to_box_frame(args.box_side as f64)
            } else {
                kps.clone()
            };
            let transferred = transfer_keypoints(&kps, &flow, src_grid.geometry());
            Ok((energy.smoothness_term, transferred))
        })
        .collect();
    let aligned: Result<Vec<(f64, KeypointSet)>> = aligned.into_iter().collect();
    let aligned = aligned?;

    let energies: Vec<densecorr::Energy64> = aligned
        .iter()
        .map(|(s, _)| densecorr::Energy64 {
            data_term: 0.0,
            smoothness_term: *s,
            total: *s,
        })
        .collect();
    let order = rank_by_deformation(&energies)?;
    let ranked: Vec<KeypointSet> = order.iter().map(|&i| aligned[i].1.clone()).collect();
    let mut prediction = aggregate_median(&ranked, args.top_n)?;

    // move the aggregate into the target's frame
    let target_truth = annotations.get(&args.target);
    let target_bbox = target_truth.map(|t| t.bbox).unwrap_or(prediction.bbox);
    prediction = if args.box_side > 0 {
        prediction.from_box_frame(target_bbox)
    } else {
        let mut p = prediction;
        p.bbox = target_bbox;
        p
    };
    prediction.image_id = args.target.clone();

    let out = out_dir.join(format!("{}.pred.csv", args.target));
    crate::util::write_atomic_with(&out, |tmp| Ok(write_annotations(tmp, &[prediction])?))?;
    eprintln!(
        "transfer {}: k={} top_n={} layer={} → {}",
        args.target,
        args.k,
        args.top_n,
        args.layer,
        out.display()
    );
    Ok(())
}
