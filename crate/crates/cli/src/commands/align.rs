//! `align`: BP flow between one source/target pair; writes the DCFW flow
//! file, the warped target image, and an energy CSV record.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use densecorr::flow::{bp_align, warp_rgb, write_flow, FlowConfig};

use crate::manifest::Manifest;
use crate::util;

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Source image id (the frame the target is warped into).
    #[arg(long)]
    pub source: String,
    /// Target image id.
    #[arg(long)]
    pub target: String,
    /// Feature layer name to align on.
    #[arg(long)]
    pub layer: String,
    #[command(flatten)]
    pub flow: FlowFlags,
}

/// Flow parameters shared by `align`, `transfer`, and tests.
#[derive(Debug, Args, Clone, Copy)]
pub struct FlowFlags {
    /// Smoothness weight β.
    #[arg(long, default_value_t = 3e-3)]
    pub beta: f64,
    /// Displacement window radius in cells.
    #[arg(long, default_value_t = 8)]
    pub radius: u32,
    /// BP sweeps.
    #[arg(long, default_value_t = 50)]
    pub iters: u32,
    /// Message damping in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
}

impl FlowFlags {
    pub fn to_config(self) -> FlowConfig {
        FlowConfig {
            beta: self.beta,
            label_radius: self.radius,
            bp_iterations: self.iters,
            damping: self.damping,
        }
    }
}

pub fn run(manifest: &Manifest, out_dir: &PathBuf, args: &AlignArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let src = util::load_grid_f64(manifest.grid_path(&args.source, &args.layer)?)?;
    let tgt = util::load_grid_f64(manifest.grid_path(&args.target, &args.layer)?)?;
    let config = args.flow.to_config();
    let (flow, energy) = bp_align(&src, &tgt, &config)
        .with_context(|| format!("aligning {} → {}", args.source, args.target))?;

    let stem = format!("{}__{}.{}", args.source, args.target, args.layer);
    util::write_atomic_with(out_dir.join(format!("{stem}.dcfw")), |tmp| {
        Ok(write_flow(&flow, &energy.to_f64(), tmp)?)
    })?;

    let target_img = util::load_rgb(&manifest.get(&args.target)?.image_path)?;
    let warped = warp_rgb(&target_img, &flow, src.geometry());
    util::save_png_atomic(out_dir.join(format!("{stem}.warped.png")), &warped)?;

    let csv = format!(
        "source,target,layer,data,smoothness,total\n{},{},{},{},{},{}\n",
        args.source, args.target, args.layer, energy.data_term, energy.smoothness_term, energy.total
    );
    util::write_atomic(out_dir.join(format!("{stem}.energy.csv")), csv.as_bytes())?;
    eprintln!(
        "align {} → {} [{}]: beta={} data={:.6} smoothness={:.6} total={:.6}",
        args.source,
        args.target,
        args.layer,
        config.beta,
        energy.data_term,
        energy.smoothness_term,
        energy.total
    );
    Ok(())
}
