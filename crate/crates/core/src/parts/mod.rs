//! Keypoint classification and prediction: one-vs-all linear SVMs over grid
//! descriptors, sliding-window part detectors with a Gaussian location
//! prior, geometric score fusion, and argmax prediction.

mod io;
mod svm;

pub use io::{read_model, read_model_manifest, write_model, write_model_manifest};
pub use svm::{mine_hard_negatives, svm_objective, train_svm, train_svm_seeded};

use crate::error::{Error, Result};
use crate::evalviz::KeypointSet;
use crate::gridgeom::FeatureGrid;
use crate::scalar::Scalar;

/// Weight vector and bias of one trained one-vs-all hinge-loss classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<S> {
    pub weights: Vec<S>,
    pub bias: S,
    pub class_label: String,
}

impl<S: Scalar> LinearModel<S> {
    /// Raw margin `w·x + b`.
    pub fn margin(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.weights.len());
        let mut dot = S::zero();
        for (&w, &v) in self.weights.iter().zip(x) {
            dot += w * v;
        }
        dot + self.bias
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Detector and fusion parameters (defaults follow the validated settings:
/// `C = 10⁻⁶`, `η = 0.1`, `σ = 22`px, 3×3 neighborhood, 10 positives per
/// keypoint, 500px canonical box).
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    /// SVM regularization trade-off.
    pub c: f64,
    /// Fusion weight in `[0, 1]`: 0 = detector only, 1 = prior only.
    pub eta: f64,
    /// Prior standard deviation in pixels.
    pub sigma: f64,
    /// Cells per side of the stacked neighborhood; odd.
    pub neighborhood: usize,
    /// Closest cells per visible instance used as positives.
    pub positives_per_keypoint: usize,
    /// Side of the square box instances are rescaled to, in pixels.
    pub canonical_box: u32,
    /// Hard-negative-mining rounds.
    pub hnm_rounds: usize,
    /// Max violators added per mining round.
    pub hnm_batch: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            c: 1e-6,
            eta: 0.1,
            sigma: 22.0,
            neighborhood: 3,
            positives_per_keypoint: 10,
            canonical_box: 500,
            hnm_rounds: 10,
            hnm_batch: 1000,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.sigma > 0.0) {
            return Err(Error::invalid("C and sigma must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid("eta must be in [0, 1]"));
        }
        if self.neighborhood.is_multiple_of(2) || self.neighborhood == 0 {
            return Err(Error::invalid("neighborhood must be odd"));
        }
        if self.positives_per_keypoint == 0 || self.canonical_box == 0 {
            return Err(Error::invalid("positive count and box side must be ≥ 1"));
        }
        Ok(())
    }
}

/// Training samples for one keypoint detector, with per-sample provenance.
#[derive(Debug, Clone)]
pub struct TrainingSet<S> {
    pub positives: Vec<Vec<S>>,
    pub negatives: Vec<Vec<S>>,
    /// `(image id, cell)` of each positive, aligned with `positives`.
    pub positive_provenance: Vec<(String, (usize, usize))>,
    /// `(image id, cell)` of each negative, aligned with `negatives`.
    pub negative_provenance: Vec<(String, (usize, usize))>,
}

/// One annotated training image: its feature grid plus keypoints.
#[derive(Clone, Copy)]
pub struct TrainingImage<'a, S> {
    pub id: &'a str,
    pub grid: &'a FeatureGrid<S>,
    pub keypoints: &'a KeypointSet,
}

/// Concatenates the `n × n` block of descriptors centered at `cell`,
/// row-major; out-of-grid cells contribute zeros. Output dim is `n²·dim`.
pub fn stack_neighborhood<S: Scalar>(
    grid: &FeatureGrid<S>,
    cell: (usize, usize),
    n: usize,
) -> Result<Vec<S>> {
    if n.is_multiple_of(2) || n == 0 {
        return Err(Error::invalid(format!("neighborhood {n} must be odd")));
    }
    let half = (n / 2) as i64;
    let mut out = Vec::with_capacity(n * n * grid.dim());
    for di in -half..=half {
        for dj in -half..=half {
            let i = cell.0 as i64 + di;
            let j = cell.1 as i64 + dj;
            if i >= 0 && j >= 0 && i < grid.height() as i64 && j < grid.width() as i64 {
                out.extend_from_slice(grid.descriptor(i as usize, j as usize));
            } else {
                out.extend(std::iter::repeat_n(S::zero(), grid.dim()));
            }
        }
    }
    Ok(out)
}

/// Builds the training set for one keypoint: per image where it is visible,
/// the `positives_per_keypoint` cells with rf centers closest to it (ties to
/// the smaller cell index) become positives; every cell whose rf square does
/// not contain the keypoint becomes a negative. Cells in neither group are
/// unused, and positives are never also negatives.
pub fn build_training_set<S: Scalar>(
    images: &[TrainingImage<'_, S>],
    keypoint_name: &str,
    config: &DetectorConfig,
) -> Result<TrainingSet<S>> {
    config.validate()?;
    let mut set = TrainingSet {
        positives: Vec::new(),
        negatives: Vec::new(),
        positive_provenance: Vec::new(),
        negative_provenance: Vec::new(),
    };
    let mut seen_visible = false;

    for img in images {
        let kp = match img.keypoints.points.get(keypoint_name) {
            Some(kp) if kp.visible => kp,
            _ => continue,
        };
        seen_visible = true;
        let grid = img.grid;
        let geom = grid.geometry();
        let target = (kp.x, kp.y);

        let mut by_dist: Vec<((usize, usize), f64)> = Vec::with_capacity(grid.height() * grid.width());
        for i in 0..grid.height() {
            for j in 0..grid.width() {
                let (cx, cy) = geom.rf_center_f64((i, j));
                let d2 = (cx - target.0).powi(2) + (cy - target.1).powi(2);
                by_dist.push(((i, j), d2));
            }
        }
        by_dist.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        let n_pos = config.positives_per_keypoint.min(by_dist.len());
        let positive_cells: Vec<(usize, usize)> =
            by_dist[..n_pos].iter().map(|&(c, _)| c).collect();

        for &cell in &positive_cells {
            set.positives
                .push(stack_neighborhood(grid, cell, config.neighborhood)?);
            set.positive_provenance.push((img.id.to_string(), cell));
        }
        for i in 0..grid.height() {
            for j in 0..grid.width() {
                if positive_cells.contains(&(i, j)) {
                    continue;
                }
                let center = geom.rf_center((i, j));
                if !geom.rf_contains(center, target) {
                    set.negatives
                        .push(stack_neighborhood(grid, (i, j), config.neighborhood)?);
                    set.negative_provenance.push((img.id.to_string(), (i, j)));
                }
            }
        }
    }

    if !seen_visible {
        return Err(Error::invalid(format!(
            "keypoint {keypoint_name:?} is visible in no training image"
        )));
    }
    Ok(set)
}

/// Distance-threshold sample selection used with the dense-descriptor
/// comparator: positives within `2·bin_size` of the keypoint, negatives at
/// least `4·bin_size` away; the annulus between is unused.
pub fn build_training_set_by_radius<S: Scalar>(
    images: &[TrainingImage<'_, S>],
    keypoint_name: &str,
    bin_size: f64,
    config: &DetectorConfig,
) -> Result<TrainingSet<S>> {
    config.validate()?;
    if bin_size.is_nan() || bin_size <= 0.0 {
        return Err(Error::invalid("bin size must be > 0"));
    }
    let (pos_r, neg_r) = (2.0 * bin_size, 4.0 * bin_size);
    let mut set = TrainingSet {
        positives: Vec::new(),
        negatives: Vec::new(),
        positive_provenance: Vec::new(),
        negative_provenance: Vec::new(),
    };
    let mut seen_visible = false;
    for img in images {
        let kp = match img.keypoints.points.get(keypoint_name) {
            Some(kp) if kp.visible => kp,
            _ => continue,
        };
        seen_visible = true;
        let grid = img.grid;
        for i in 0..grid.height() {
            for j in 0..grid.width() {
                let (cx, cy) = grid.geometry().rf_center_f64((i, j));
                let d = ((cx - kp.x).powi(2) + (cy - kp.y).powi(2)).sqrt();
                if d <= pos_r {
                    set.positives
                        .push(stack_neighborhood(grid, (i, j), config.neighborhood)?);
                    set.positive_provenance.push((img.id.to_string(), (i, j)));
                } else if d >= neg_r {
                    set.negatives
                        .push(stack_neighborhood(grid, (i, j), config.neighborhood)?);
                    set.negative_provenance.push((img.id.to_string(), (i, j)));
                }
            }
        }
    }
    if !seen_visible {
        return Err(Error::invalid(format!(
            "keypoint {keypoint_name:?} is visible in no training image"
        )));
    }
    Ok(set)
}

/// One-vs-all classification: the label of the maximum margin, ties to the
/// lexicographically smallest label. Also returns all margins.
pub fn classify_keypoint<S: Scalar>(
    models: &[LinearModel<S>],
    feature: &[S],
) -> Result<(String, Vec<(String, S)>)> {
    if models.is_empty() {
        return Err(Error::invalid("classification needs at least one model"));
    }
    for m in models {
        if m.dim() != feature.len() {
            return Err(Error::mismatch(format!(
                "model {:?} dim {} vs feature dim {}",
                m.class_label,
                m.dim(),
                feature.len()
            )));
        }
    }
    let scores: Vec<(String, S)> = models
        .iter()
        .map(|m| (m.class_label.clone(), m.margin(feature)))
        .collect();
    let mut best = 0;
    for i in 1..scores.len() {
        let better = scores[i].1 > scores[best].1
            || (scores[i].1 == scores[best].1 && scores[i].0 < scores[best].0);
        if better {
            best = i;
        }
    }
    Ok((scores[best].0.clone(), scores))
}

/// Unnormalized spherical Gaussian prior: `exp(−‖candidate−mu‖²/(2σ²))`,
/// maximum 1 at the mean.
pub fn prior_score(candidate: (f64, f64), mu: (f64, f64), sigma: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be > 0");
    let d2 = (candidate.0 - mu.0).powi(2) + (candidate.1 - mu.1).powi(2);
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Geometric score fusion `s^(1−η)·p^η` on `(0, 1]` scores.
pub fn fuse_scores(s: f64, p: f64, eta: f64) -> Result<f64> {
    if !(s > 0.0 && p > 0.0) {
        return Err(Error::invalid(format!(
            "fusion needs positive scores, got s={s}, p={p}"
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must be in [0, 1], got {eta}")));
    }
    Ok(s.powf(1.0 - eta) * p.powf(eta))
}

/// Logistic squash mapping a raw SVM margin into `(0, 1)`, making it usable
/// by the power fusion. Clamped away from zero so the fused log-score stays
/// finite for arbitrarily negative margins.
pub fn squash_margin(margin: f64) -> f64 {
    (1.0 / (1.0 + (-margin).exp())).max(1e-300)
}

/// Squashed detector margins, one per grid cell, row-major.
pub fn detector_score_map<S: Scalar>(
    grid: &FeatureGrid<S>,
    model: &LinearModel<S>,
    neighborhood: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.height() * grid.width());
    for i in 0..grid.height() {
        for j in 0..grid.width() {
            let feature = stack_neighborhood(grid, (i, j), neighborhood)?;
            if feature.len() != model.dim() {
                return Err(Error::mismatch(format!(
                    "stacked dim {} vs model dim {}",
                    feature.len(),
                    model.dim()
                )));
            }
            out.push(squash_margin(model.margin(&feature).to_f64_c()));
        }
    }
    Ok(out)
}

/// Fuses per-cell detector scores with the Gaussian prior at each cell's rf
/// center and returns the argmax rf center (ties to the smaller cell, row
/// before column) plus the fused score map.
///
/// The argmax is taken in log domain, so an extremely peaked prior cannot
/// underflow away from the decision.
pub fn fuse_with_prior(
    grid: (&crate::gridgeom::GridGeometry, usize, usize),
    detector_scores: &[f64],
    prior_mu: (f64, f64),
    config: &DetectorConfig,
) -> Result<((f64, f64), Vec<f64>)> {
    let (geometry, height, width) = grid;
    config.validate()?;
    if detector_scores.len() != height * width {
        return Err(Error::mismatch(format!(
            "{} scores for {height}×{width} grid",
            detector_scores.len()
        )));
    }
    let eta = config.eta;
    let mut best_log = f64::NEG_INFINITY;
    let mut best_cell = (0usize, 0usize);
    let mut map = Vec::with_capacity(height * width);
    for i in 0..height {
        for j in 0..width {
            let s = detector_scores[i * width + j];
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::invalid(format!(
                    "detector score {s} at ({i},{j}) outside (0, 1]"
                )));
            }
            let center = geometry.rf_center_f64((i, j));
            let d2 = (center.0 - prior_mu.0).powi(2) + (center.1 - prior_mu.1).powi(2);
            let log_p = -d2 / (2.0 * config.sigma * config.sigma);
            let log_f = (1.0 - eta) * s.ln() + eta * log_p;
            map.push(log_f.exp());
            if log_f > best_log {
                best_log = log_f;
                best_cell = (i, j);
            }
        }
    }
    Ok((geometry.rf_center_f64(best_cell), map))
}

/// Full prediction for one keypoint on one grid: squashed SVM margins on
/// stacked neighborhoods, fused with the location prior; returns the rf
/// center of the best cell and the fused score map.
pub fn predict_keypoint<S: Scalar>(
    grid: &FeatureGrid<S>,
    model: &LinearModel<S>,
    prior_mu: (f64, f64),
    config: &DetectorConfig,
) -> Result<((f64, f64), Vec<f64>)> {
    let scores = detector_score_map(grid, model, config.neighborhood)?;
    fuse_with_prior(
        (grid.geometry(), grid.height(), grid.width()),
        &scores,
        prior_mu,
        config,
    )
}
