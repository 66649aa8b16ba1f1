//! `evaluate`: PCK tables from prediction and truth annotation files, at one
//! or more α values. With a manifest, also emits the per-category table
//! (categories as columns, mean last).

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use densecorr::evalviz::{pck, read_annotations, write_pck_csv, KeypointSet, PckReport};

use crate::manifest::Manifest;
use crate::util;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted annotations (annotation CSV format).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Ground-truth annotations.
    #[arg(long)]
    pub truths: PathBuf,
    /// Comma-separated α values.
    #[arg(long, default_value = "0.1,0.05,0.025")]
    pub alphas: String,
}

pub fn run(manifest: Option<&Manifest>, out_dir: &PathBuf, args: &EvaluateArgs) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let predictions = read_annotations(&args.predictions)?;
    let truths = read_annotations(&args.truths)?;
    let alphas: Vec<f64> = args
        .alphas
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("bad alpha"))
        .collect::<Result<_>>()?;

    let mut reports: Vec<PckReport> = Vec::new();
    for &alpha in &alphas {
        reports.push(pck(&predictions, &truths, alpha)?);
    }
    util::write_atomic_with(out_dir.join("pck_types.csv"), |tmp| {
        Ok(write_pck_csv(tmp, &reports)?)
    })?;

    if let Some(manifest) = manifest {
        // group image ids by category, evaluate each group separately
        let mut by_category: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for record in manifest.records() {
            by_category
                .entry(record.category.as_str())
                .or_default()
                .push(record.image_id.as_str());
        }
        let select = |sets: &[KeypointSet], ids: &[&str]| -> Vec<KeypointSet> {
            sets.iter()
                .filter(|s| ids.contains(&s.image_id.as_str()))
                .cloned()
                .collect()
        };
        let mut csv = String::from("alpha");
        for cat in by_category.keys() {
            csv.push(',');
            csv.push_str(cat);
        }
        csv.push_str(",mean\n");
        for &alpha in &alphas {
            let mut row = format!("{alpha}");
            let mut means = Vec::new();
            for ids in by_category.values() {
                let p = select(&predictions, ids);
                let t = select(&truths, ids);
                if t.is_empty() {
                    row.push(',');
                    continue;
                }
                let r = pck(&p, &t, alpha)?;
                row.push_str(&format!(",{:.4}", r.mean));
                means.push(r.mean);
            }
            let mean = means.iter().sum::<f64>() / means.len().max(1) as f64;
            csv.push_str(&format!("{row},{mean:.4}\n"));
        }
        util::write_atomic(out_dir.join("pck_categories.csv"), csv.as_bytes())?;
    }

    for r in &reports {
        eprintln!("evaluate: PCK@{} mean {:.4} over {} types", r.alpha, r.mean, r.per_type.len());
    }
    Ok(())
}
