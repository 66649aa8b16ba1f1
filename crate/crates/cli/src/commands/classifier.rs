//! `train-classifier` / `classify`: keypoint classification with one-vs-all
//! linear SVMs on the grid column whose rf center lies closest to the
//! keypoint. Includes the cross-validation C-sweep harness.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use densecorr::parts::{
    classify_keypoint, read_model, read_model_manifest, train_svm, write_model,
    write_model_manifest, LinearModel,
};
use densecorr::FeatureGrid64;

use crate::manifest::{Manifest, Split};
use crate::util;

#[derive(Debug, Args)]
pub struct TrainClassifierArgs {
    #[arg(long)]
    pub category: String,
    /// Feature layer supplying the per-keypoint column.
    #[arg(long)]
    pub layer: String,
    /// SVM regularization trade-off.
    #[arg(long, default_value_t = 1e-6)]
    pub c: f64,
    /// Comma-separated C values: run a 5-fold cross-validation sweep on the
    /// train split instead of training final models.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long)]
    pub layer: String,
    /// Directory holding `models.tsv` from `train-classifier`.
    #[arg(long)]
    pub models: PathBuf,
    /// Split to evaluate (train or val).
    #[arg(long, default_value = "val")]
    pub split: Split,
}

/// One labeled sample: the descriptor column nearest the keypoint.
struct Sample {
    label: String,
    feature: Vec<f64>,
}

fn collect_samples(
    manifest: &Manifest,
    category: &str,
    layer: &str,
    split: Split,
) -> Result<Vec<Sample>> {
    let annotations = manifest.load_annotations()?;
    let mut samples = Vec::new();
    for record in manifest.select(Some(category), Some(split)) {
        let Some(kps) = annotations.get(&record.image_id) else {
            continue;
        };
        let grid: FeatureGrid64 = util::load_grid_f64(
            record
                .grids
                .get(layer)
                .with_context(|| format!("{:?} has no {layer:?} grid", record.image_id))?,
        )?;
        for (name, kp) in &kps.points {
            if !kp.visible {
                continue;
            }
            let cell = grid.nearest_cell((kp.x, kp.y));
            samples.push(Sample {
                label: name.clone(),
                feature: grid.descriptor(cell.0, cell.1).to_vec(),
            });
        }
    }
    if samples.is_empty() {
        bail!("no visible keypoints for category {category:?} in split {split}");
    }
    Ok(samples)
}

fn train_one_vs_all(samples: &[Sample], c: f64) -> Result<Vec<LinearModel<f64>>> {
    let mut labels: Vec<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        bail!("one-vs-all training needs ≥ 2 keypoint types, got {}", labels.len());
    }
    let mut models = Vec::new();
    for label in labels {
        let positives: Vec<Vec<f64>> = samples
            .iter()
            .filter(|s| s.label == label)
            .map(|s| s.feature.clone())
            .collect();
        let negatives: Vec<Vec<f64>> = samples
            .iter()
            .filter(|s| s.label != label)
            .map(|s| s.feature.clone())
            .collect();
        models.push(train_svm(&positives, &negatives, c, label)?);
    }
    Ok(models)
}

/// Per-type `(correct, total)` counts plus the overall accuracy.
type AccuracyTable = (f64, BTreeMap<String, (usize, usize)>);

fn accuracy(models: &[LinearModel<f64>], samples: &[Sample]) -> Result<AccuracyTable> {
    let mut correct = 0usize;
    let mut per_type: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for s in samples {
        let (label, _) = classify_keypoint(models, &s.feature)?;
        let entry = per_type.entry(s.label.clone()).or_default();
        entry.1 += 1;
        if label == s.label {
            entry.0 += 1;
            correct += 1;
        }
    }
    Ok((correct as f64 / samples.len() as f64, per_type))
}

fn write_accuracy_csv(
    path: &Path,
    overall: f64,
    per_type: &BTreeMap<String, (usize, usize)>,
) -> Result<()> {
    let mut csv = String::from("keypoint,correct,total,accuracy\n");
    for (name, (c, n)) in per_type {
        csv.push_str(&format!("{name},{c},{n},{:.4}\n", *c as f64 / *n as f64));
    }
    csv.push_str(&format!("__overall__,,,{overall:.4}\n"));
    util::write_atomic(path, csv.as_bytes())
}

pub fn run_train(manifest: &Manifest, out_dir: &Path, args: &TrainClassifierArgs) -> Result<()> {
    let train = collect_samples(manifest, &args.category, &args.layer, Split::Train)?;

    if let Some(sweep) = &args.sweep {
        // Fig-cv-style harness: 5-fold cross validation per C value
        let cs: Vec<f64> = sweep
            .split(',')
            .map(|s| s.trim().parse::<f64>().context("bad C value in --sweep"))
            .collect::<Result<_>>()?;
        let mut csv = String::from("c,cv_accuracy\n");
        for &c in &cs {
            let mut accs = Vec::new();
            for fold in 0..5 {
                let held: Vec<&Sample> = train
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % 5 == fold)
                    .map(|(_, s)| s)
                    .collect();
                let kept: Vec<Sample> = train
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % 5 != fold)
                    .map(|(_, s)| Sample {
                        label: s.label.clone(),
                        feature: s.feature.clone(),
                    })
                    .collect();
                if held.is_empty() || kept.is_empty() {
                    continue;
                }
                let models = match train_one_vs_all(&kept, c) {
                    Ok(m) => m,
                    Err(_) => continue, // fold lost a class entirely
                };
                let mut correct = 0usize;
                for s in &held {
                    if classify_keypoint(&models, &s.feature)?.0 == s.label {
                        correct += 1;
                    }
                }
                accs.push(correct as f64 / held.len() as f64);
            }
            let mean = accs.iter().sum::<f64>() / accs.len().max(1) as f64;
            csv.push_str(&format!("{c:e},{mean:.4}\n"));
        }
        let path = out_dir.join(format!("{}.csweep.csv", args.category));
        util::write_atomic(&path, csv.as_bytes())?;
        eprintln!("train-classifier sweep → {}", path.display());
        return Ok(());
    }

    let models = train_one_vs_all(&train, args.c)?;
    let model_dir = out_dir.join("classifier").join(&args.category);
    std::fs::create_dir_all(&model_dir)?;
    let mut entries = Vec::new();
    for model in &models {
        let path = model_dir.join(format!("{}.model", model.class_label));
        util::write_atomic_with(&path, |tmp| Ok(write_model(model, tmp)?))?;
        entries.push((model.class_label.clone(), path));
    }
    util::write_atomic_with(model_dir.join("models.tsv"), |tmp| {
        Ok(write_model_manifest(tmp, &entries)?)
    })?;

    let val = collect_samples(manifest, &args.category, &args.layer, Split::Val)?;
    let (overall, per_type) = accuracy(&models, &val)?;
    write_accuracy_csv(
        &out_dir.join(format!("{}.classifier_accuracy.csv", args.category)),
        overall,
        &per_type,
    )?;
    eprintln!(
        "train-classifier {}: C={} {} types, val accuracy {:.4}",
        args.category,
        args.c,
        models.len(),
        overall
    );
    Ok(())
}

pub fn run_classify(manifest: &Manifest, out_dir: &Path, args: &ClassifyArgs) -> Result<()> {
    let entries = read_model_manifest(args.models.join("models.tsv"))?;
    if entries.len() < 2 {
        bail!("classification needs ≥ 2 models, found {}", entries.len());
    }
    let models: Vec<LinearModel<f64>> = entries
        .iter()
        .map(|(_, p)| Ok(read_model(p)?))
        .collect::<Result<_>>()?;
    let samples = collect_samples(manifest, &args.category, &args.layer, args.split)?;
    let (overall, per_type) = accuracy(&models, &samples)?;
    write_accuracy_csv(
        &out_dir.join(format!("{}.classify_{}.csv", args.category, args.split)),
        overall,
        &per_type,
    )?;
    eprintln!(
        "classify {} [{}]: accuracy {:.4} over {} samples",
        args.category,
        args.split,
        overall,
        samples.len()
    );
    Ok(())
}
