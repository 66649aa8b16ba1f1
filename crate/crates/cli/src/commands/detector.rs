//! `train-detector` / `predict`: sliding-window keypoint detectors
//! (stacked-neighborhood SVMs with hard negative mining) and argmax keypoint
//! prediction fused with a nearest-neighbor Gaussian location prior.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use densecorr::descriptors::{GlobalDescriptor, NNIndex};
use densecorr::evalviz::{pck, write_annotations, Keypoint, KeypointSet};
use densecorr::gridgeom::read_grid;
use densecorr::parts::{
    build_training_set, mine_hard_negatives, predict_keypoint, read_model, read_model_manifest,
    train_svm, write_model, write_model_manifest, DetectorConfig, LinearModel, TrainingImage,
};

use crate::manifest::{Manifest, Split};
use crate::util;

#[derive(Debug, Args, Clone)]
pub struct DetectorFlags {
    /// SVM regularization trade-off.
    #[arg(long, default_value_t = 1e-6)]
    pub c: f64,
    /// Fusion weight η (0 = detector only).
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Gaussian prior standard deviation in pixels.
    #[arg(long, default_value_t = 22.0)]
    pub sigma: f64,
    /// Stacked neighborhood side in cells (odd).
    #[arg(long, default_value_t = 3)]
    pub neighborhood: usize,
    /// Closest cells per instance used as positives.
    #[arg(long, default_value_t = 10)]
    pub positives: usize,
    /// Square box side instances are rescaled to, in pixels.
    #[arg(long, default_value_t = 500)]
    pub canonical_box: u32,
    /// Hard-negative-mining rounds.
    #[arg(long, default_value_t = 10)]
    pub hnm_rounds: usize,
    /// Violators added per mining round.
    #[arg(long, default_value_t = 1000)]
    pub hnm_batch: usize,
}

impl DetectorFlags {
    fn to_config(&self) -> DetectorConfig {
        DetectorConfig {
            c: self.c,
            eta: self.eta,
            sigma: self.sigma,
            neighborhood: self.neighborhood,
            positives_per_keypoint: self.positives,
            canonical_box: self.canonical_box,
            hnm_rounds: self.hnm_rounds,
            hnm_batch: self.hnm_batch,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainDetectorArgs {
    #[arg(long)]
    pub category: String,
    /// Feature layer the detectors slide over (grids must be in the
    /// canonical box frame).
    #[arg(long)]
    pub layer: String,
    /// Train only this keypoint (default: all keypoints of the category).
    #[arg(long)]
    pub keypoint: Option<String>,
    #[command(flatten)]
    pub flags: DetectorFlags,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long)]
    pub layer: String,
    /// Directory holding `models.tsv` from `train-detector`.
    #[arg(long)]
    pub models: PathBuf,
    /// PCK α for the report.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[command(flatten)]
    pub flags: DetectorFlags,
}

/// Keypoints mapped into the canonical box frame the grids live in.
fn box_frame_annotations(
    manifest: &Manifest,
    category: &str,
    split: Split,
    side: f64,
) -> Result<Vec<(String, KeypointSet)>> {
    let annotations = manifest.load_annotations()?;
    let mut out = Vec::new();
    for record in manifest.select(Some(category), Some(split)) {
        if let Some(kps) = annotations.get(&record.image_id) {
            out.push((record.image_id.clone(), kps.to_box_frame(side)));
        }
    }
    if out.is_empty() {
        bail!("no annotated images for category {category:?} in split {split}");
    }
    Ok(out)
}

pub fn run_train(manifest: &Manifest, out_dir: &Path, args: &TrainDetectorArgs) -> Result<()> {
    let config = args.flags.to_config();
    let side = config.canonical_box as f64;
    let annotated = box_frame_annotations(manifest, &args.category, Split::Train, side)?;

    // load grids once
    let mut grids = Vec::new();
    for (id, _) in &annotated {
        grids.push(util::load_grid_f64(manifest.grid_path(id, &args.layer)?)?);
    }
    let images: Vec<TrainingImage<'_, f64>> = annotated
        .iter()
        .zip(&grids)
        .map(|((id, kps), grid)| TrainingImage {
            id,
            grid,
            keypoints: kps,
        })
        .collect();

    let mut names: Vec<String> = annotated
        .iter()
        .flat_map(|(_, kps)| kps.points.keys().cloned())
        .collect();
    names.sort_unstable();
    names.dedup();
    if let Some(only) = &args.keypoint {
        names.retain(|n| n == only);
        if names.is_empty() {
            bail!("keypoint {only:?} not present in category {:?}", args.category);
        }
    }

    let model_dir = out_dir.join("detector").join(&args.category);
    std::fs::create_dir_all(&model_dir)?;
    let mut entries = Vec::new();
    for name in &names {
        let set = build_training_set(&images, name, &config)
            .with_context(|| format!("training set for keypoint {name:?}"))?;
        if set.negatives.is_empty() {
            bail!("keypoint {name:?} yields no negatives; grids too coarse");
        }
        // seed negatives, then mine the rest of the pool
        let n_seed = config.hnm_batch.min(set.negatives.len());
        let seed_negatives = &set.negatives[..n_seed];
        let initial = train_svm(&set.positives, seed_negatives, config.c, name.clone())?;
        let (model, added) = mine_hard_negatives(
            &initial,
            &set.positives,
            seed_negatives,
            &set.negatives[n_seed..],
            &config,
        )?;
        eprintln!(
            "train-detector {}/{name}: {} positives, {} seed negatives, {} mined",
            args.category,
            set.positives.len(),
            n_seed,
            added.len()
        );
        let path = model_dir.join(format!("{name}.model"));
        util::write_atomic_with(&path, |tmp| Ok(write_model(&model, tmp)?))?;
        entries.push((name.clone(), path));
    }
    util::write_atomic_with(model_dir.join("models.tsv"), |tmp| {
        Ok(write_model_manifest(tmp, &entries)?)
    })?;
    eprintln!(
        "train-detector {}: {} models → {}",
        args.category,
        entries.len(),
        model_dir.display()
    );
    Ok(())
}

pub fn run_predict(manifest: &Manifest, out_dir: &Path, args: &PredictArgs) -> Result<()> {
    let config = args.flags.to_config();
    let side = config.canonical_box as f64;
    eprintln!(
        "predict {}: eta={} sigma={} alpha={} box={}",
        args.category, config.eta, config.sigma, args.alpha, config.canonical_box
    );

    let entries = read_model_manifest(args.models.join("models.tsv"))?;
    let models: BTreeMap<String, LinearModel<f64>> = entries
        .iter()
        .map(|(name, p)| Ok((name.clone(), read_model(p)?)))
        .collect::<Result<_>>()?;

    // per-instance prior: the nearest train image by cosine on global
    // descriptors supplies every keypoint mean
    let mut index = NNIndex::<f32>::new();
    for record in manifest.select(Some(&args.category), Some(Split::Train)) {
        if let Some(path) = &record.global_path {
            let g = GlobalDescriptor::from_grid(&read_grid(path)?)?;
            index.push(record.image_id.clone(), &g.vector)?;
        }
    }
    let annotations = manifest.load_annotations()?;
    let val = box_frame_annotations(manifest, &args.category, Split::Val, side)?;

    let mut with_prior = Vec::new();
    let mut without_prior = Vec::new();
    let mut truths = Vec::new();
    for (id, truth_box) in &val {
        let record = manifest.get(id)?;
        let grid = util::load_grid_f64(manifest.grid_path(id, &args.layer)?)?;

        // retrieve the prior neighbor (needs a global descriptor)
        let neighbor_kps = if index.is_empty() {
            None
        } else if let Some(path) = &record.global_path {
            let q = GlobalDescriptor::from_grid(&read_grid(path)?)?;
            let (neighbor_id, _) = index.knn(&q.vector, 1)?.pop().unwrap();
            annotations.get(&neighbor_id).map(|k| k.to_box_frame(side))
        } else {
            None
        };

        let truth_full = annotations
            .get(id)
            .with_context(|| format!("no annotations for {id:?}"))?;
        let mut pred_prior = KeypointSet::new(id.clone(), truth_full.bbox);
        let mut pred_detector = KeypointSet::new(id.clone(), truth_full.bbox);

        for (name, model) in &models {
            let detector_only = DetectorConfig {
                eta: 0.0,
                ..config
            };
            let ((dx, dy), _) = predict_keypoint(&grid, model, (0.0, 0.0), &detector_only)?;
            if std::env::var("DENSECORR_DEBUG").is_ok() {
                let truth_kp = truth_box.points.get(name);
                eprintln!(
                    "predict {id}/{name}: detector ({dx:.1},{dy:.1}) truth {:?}",
                    truth_kp.map(|k| (k.x, k.y))
                );
            }
            let from_box = |x: f64, y: f64| -> (f64, f64) {
                (
                    truth_full.bbox.x + x * truth_full.bbox.w / side,
                    truth_full.bbox.y + y * truth_full.bbox.h / side,
                )
            };
            let (ix, iy) = from_box(dx, dy);
            pred_detector.insert(name.clone(), Keypoint { x: ix, y: iy, visible: true });

            // prior available only when the neighbor shows this keypoint
            let mu = neighbor_kps
                .as_ref()
                .and_then(|k| k.points.get(name))
                .filter(|kp| kp.visible)
                .map(|kp| (kp.x, kp.y));
            let (px, py) = match mu {
                Some(mu) => predict_keypoint(&grid, model, mu, &config)?.0,
                None => (dx, dy),
            };
            let (ix, iy) = from_box(px, py);
            pred_prior.insert(name.clone(), Keypoint { x: ix, y: iy, visible: true });
        }
        with_prior.push(pred_prior);
        without_prior.push(pred_detector);
        let mut truth_img = truth_box.from_box_frame(truth_full.bbox);
        truth_img.image_id = id.clone();
        truths.push(truth_img);
    }

    std::fs::create_dir_all(out_dir)?;
    util::write_atomic_with(out_dir.join(format!("{}.pred.csv", args.category)), |tmp| {
        Ok(write_annotations(tmp, &with_prior)?)
    })?;
    util::write_atomic_with(
        out_dir.join(format!("{}.pred_noprior.csv", args.category)),
        |tmp| Ok(write_annotations(tmp, &without_prior)?),
    )?;

    let report_prior = pck(&with_prior, &truths, args.alpha)?;
    let report_detector = pck(&without_prior, &truths, args.alpha)?;
    let mut types: Vec<&String> = report_prior.per_type.keys().collect();
    types.sort_unstable();
    let mut csv = String::from("method");
    for t in &types {
        csv.push(',');
        csv.push_str(t);
    }
    csv.push_str(",mean\n");
    for (label, report) in [("detector+prior", &report_prior), ("detector", &report_detector)] {
        csv.push_str(label);
        for t in &types {
            match report.per_type.get(*t) {
                Some(a) => csv.push_str(&format!(",{a:.4}")),
                None => csv.push(','),
            }
        }
        csv.push_str(&format!(",{:.4}\n", report.mean));
    }
    util::write_atomic(
        out_dir.join(format!("{}.pck.csv", args.category)),
        csv.as_bytes(),
    )?;
    eprintln!(
        "predict {}: PCK@{} with prior {:.4}, detector only {:.4}",
        args.category, args.alpha, report_prior.mean, report_detector.mean
    );
    Ok(())
}
