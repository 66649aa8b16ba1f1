//! Keypoint ground truth and predictions, PCK evaluation, classifier
//! response histograms, and the patch-level visualizations.

mod annot;
mod viz;

pub use annot::{read_annotations, write_annotations, write_pck_csv};
pub use viz::{patch_reconstruction, rf_average, uniform_rf_baseline, PatchDatabase};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One named keypoint in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

/// Object bounding box in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Named keypoints of one image, with visibility flags and a bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    pub image_id: String,
    pub bbox: BoundingBox,
    pub points: BTreeMap<String, Keypoint>,
}

impl KeypointSet {
    pub fn new(image_id: impl Into<String>, bbox: BoundingBox) -> Self {
        KeypointSet {
            image_id: image_id.into(),
            bbox,
            points: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, kp: Keypoint) {
        self.points.insert(name.into(), kp);
    }

    /// Maps keypoints into the `side × side` square-box frame the instance is
    /// warped to before alignment: bbox corners go to (0,0) and (side,side).
    pub fn to_box_frame(&self, side: f64) -> KeypointSet {
        let mut out = self.clone();
        out.bbox = BoundingBox {
            x: 0.0,
            y: 0.0,
            w: side,
            h: side,
        };
        for kp in out.points.values_mut() {
            kp.x = (kp.x - self.bbox.x) * side / self.bbox.w;
            kp.y = (kp.y - self.bbox.y) * side / self.bbox.h;
        }
        out
    }

    /// Inverse of [`to_box_frame`](Self::to_box_frame): maps points from this
    /// set's square frame back into `bbox` image coordinates.
    pub fn from_box_frame(&self, bbox: BoundingBox) -> KeypointSet {
        let mut out = self.clone();
        out.bbox = bbox;
        for kp in out.points.values_mut() {
            kp.x = bbox.x + kp.x * bbox.w / self.bbox.w;
            kp.y = bbox.y + kp.y * bbox.h / self.bbox.h;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bbox.w > 0.0 && self.bbox.h > 0.0) {
            return Err(Error::invalid(format!(
                "bounding box of {:?} must have positive size",
                self.image_id
            )));
        }
        for (name, kp) in &self.points {
            if kp.visible && !(kp.x.is_finite() && kp.y.is_finite()) {
                return Err(Error::invalid(format!(
                    "visible keypoint {name:?} of {:?} has non-finite coordinates",
                    self.image_id
                )));
            }
        }
        Ok(())
    }
}

/// Percentage-of-correct-keypoints report at one α.
#[derive(Debug, Clone, PartialEq)]
pub struct PckReport {
    pub alpha: f64,
    /// Per keypoint type: fraction correct among visible ground truths.
    /// Types with no visible ground truth are absent.
    pub per_type: BTreeMap<String, f64>,
    /// Unweighted mean over the types present in `per_type`.
    pub mean: f64,
}

/// PCK over prediction/truth pairs matched by `image_id`.
///
/// A visible ground-truth keypoint counts as correct iff a visible prediction
/// of the same name exists and lies strictly within `α·max(bbox w, h)` of it,
/// with the bounding box taken from the ground truth. Invisible ground truths
/// are skipped; a missing prediction for a visible truth is incorrect.
pub fn pck(predictions: &[KeypointSet], truths: &[KeypointSet], alpha: f64) -> Result<PckReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha must be in (0, 1], got {alpha}")));
    }
    let by_id: BTreeMap<&str, &KeypointSet> = predictions
        .iter()
        .map(|p| (p.image_id.as_str(), p))
        .collect();
    let truth_ids: std::collections::BTreeSet<&str> =
        truths.iter().map(|t| t.image_id.as_str()).collect();
    for p in predictions {
        if !truth_ids.contains(p.image_id.as_str()) {
            return Err(Error::invalid(format!(
                "prediction for unknown image {:?}",
                p.image_id
            )));
        }
    }

    let mut visible: BTreeMap<String, usize> = BTreeMap::new();
    let mut correct: BTreeMap<String, usize> = BTreeMap::new();
    for truth in truths {
        let pred = by_id.get(truth.image_id.as_str()).ok_or_else(|| {
            Error::invalid(format!("no prediction for image {:?}", truth.image_id))
        })?;
        let threshold = alpha * truth.bbox.w.max(truth.bbox.h);
        for (name, t) in &truth.points {
            if !t.visible {
                continue;
            }
            *visible.entry(name.clone()).or_default() += 1;
            if let Some(p) = pred.points.get(name) {
                if p.visible {
                    let dist = ((p.x - t.x).powi(2) + (p.y - t.y).powi(2)).sqrt();
                    if dist < threshold {
                        *correct.entry(name.clone()).or_default() += 1;
                    }
                }
            }
        }
    }

    let per_type: BTreeMap<String, f64> = visible
        .iter()
        .map(|(name, &n)| {
            let c = correct.get(name).copied().unwrap_or(0);
            (name.clone(), c as f64 / n as f64)
        })
        .collect();
    let mean = if per_type.is_empty() {
        0.0
    } else {
        per_type.values().sum::<f64>() / per_type.len() as f64
    };
    Ok(PckReport {
        alpha,
        per_type,
        mean,
    })
}

/// Half-width of the response window: responses are scanned on a
/// `21 × 21` single-pixel lattice centered on the ground truth.
pub const RESPONSE_HALF: i32 = 10;
/// Window side (`2·RESPONSE_HALF + 1`).
pub const RESPONSE_SIDE: usize = 21;

/// 2D histogram of maximum-response locations around ground-truth keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseHistogram {
    /// Row-major `21 × 21` counts, indexed `[dy + 10][dx + 10]`.
    pub counts: Vec<u32>,
    /// Instances whose maximum fell on the window boundary; excluded from
    /// the grid.
    pub excluded_boundary: u32,
}

impl Default for ResponseHistogram {
    fn default() -> Self {
        Self::new()
    }
}

impl ResponseHistogram {
    pub fn new() -> Self {
        ResponseHistogram {
            counts: vec![0; RESPONSE_SIDE * RESPONSE_SIDE],
            excluded_boundary: 0,
        }
    }

    /// Evaluates `score(dx, dy)` over the window and accumulates the argmax
    /// offset of this instance. Exact ties keep the first offset in row-major
    /// scan order.
    pub fn accumulate(&mut self, mut score: impl FnMut(i32, i32) -> f64) {
        let mut best = f64::NEG_INFINITY;
        let mut best_off = (0i32, 0i32);
        for dy in -RESPONSE_HALF..=RESPONSE_HALF {
            for dx in -RESPONSE_HALF..=RESPONSE_HALF {
                let s = score(dx, dy);
                if s > best {
                    best = s;
                    best_off = (dx, dy);
                }
            }
        }
        let (dx, dy) = best_off;
        if dx.abs() == RESPONSE_HALF || dy.abs() == RESPONSE_HALF {
            self.excluded_boundary += 1;
        } else {
            let row = (dy + RESPONSE_HALF) as usize;
            let col = (dx + RESPONSE_HALF) as usize;
            self.counts[row * RESPONSE_SIDE + col] += 1;
        }
    }

    pub fn count_at(&self, dx: i32, dy: i32) -> u32 {
        let row = (dy + RESPONSE_HALF) as usize;
        let col = (dx + RESPONSE_HALF) as usize;
        self.counts[row * RESPONSE_SIDE + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum::<u64>() + self.excluded_boundary as u64
    }
}
