//! Intraclass alignment: the MRF flow energy, min-sum belief propagation
//! with distance-transform messages, warping, keypoint transfer, and
//! multi-neighbor aggregation.
//!
//! The energy over a displacement field `w` on the feature grid is
//!
//! ```text
//! E(w) = Σ_p ‖f_s(p) − f_t(p + w(p))‖₂  +  β Σ_(p,q)∈E ‖w(p) − w(q)‖₂²
//! ```
//!
//! with `E` the 4-neighborhood edge set, each edge counted once. The data
//! term uses the unsquared Euclidean norm; the quadratic smoothness keeps
//! `w` rotationally invariant (unlike an L1 penalty) and makes BP messages
//! computable by the squared-Euclidean distance transform.

mod bp;
mod dt;
mod io;
mod warp;

pub use bp::bp_align;
pub use dt::{dt1d_quadratic, dt2d_quadratic};
pub use io::{read_flow, write_flow};
pub use warp::{pixel_flow_at, transfer_keypoints, warp_gray, warp_rgb};

use crate::error::{Error, Result};
use crate::evalviz::{Keypoint, KeypointSet};
use crate::gridgeom::FeatureGrid;
use crate::scalar::Scalar;

/// Per-cell integer displacement field in grid-cell units.
///
/// Invariants: `‖w(p)‖∞ ≤ label_radius` and `p + w(p)` in-bounds for every
/// cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowField {
    height: usize,
    width: usize,
    label_radius: u32,
    /// Row-major `(dy, dx)` per cell.
    d: Vec<(i16, i16)>,
}

impl FlowField {
    pub fn zero(height: usize, width: usize, label_radius: u32) -> Self {
        FlowField {
            height,
            width,
            label_radius,
            d: vec![(0, 0); height * width],
        }
    }

    pub fn from_vec(
        height: usize,
        width: usize,
        label_radius: u32,
        d: Vec<(i16, i16)>,
    ) -> Result<Self> {
        if d.len() != height * width {
            return Err(Error::mismatch(format!(
                "flow data length {} != {height}·{width}",
                d.len()
            )));
        }
        let flow = FlowField {
            height,
            width,
            label_radius,
            d,
        };
        flow.validate()?;
        Ok(flow)
    }

    fn validate(&self) -> Result<()> {
        let r = self.label_radius as i64;
        for i in 0..self.height {
            for j in 0..self.width {
                let (dy, dx) = self.displacement(i, j);
                let (dy, dx) = (dy as i64, dx as i64);
                if dy.abs() > r || dx.abs() > r {
                    return Err(Error::invalid(format!(
                        "|w({i},{j})|∞ = {} exceeds label radius {r}",
                        dy.abs().max(dx.abs())
                    )));
                }
                let (ti, tj) = (i as i64 + dy, j as i64 + dx);
                if ti < 0 || tj < 0 || ti >= self.height as i64 || tj >= self.width as i64 {
                    return Err(Error::invalid(format!(
                        "w({i},{j}) = ({dy},{dx}) leaves the grid"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn label_radius(&self) -> u32 {
        self.label_radius
    }

    /// Displacement `(dy, dx)` of cell `(i, j)` in cells.
    pub fn displacement(&self, i: usize, j: usize) -> (i16, i16) {
        self.d[i * self.width + j]
    }

    pub fn displacements(&self) -> &[(i16, i16)] {
        &self.d
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|&(dy, dx)| dy == 0 && dx == 0)
    }
}

/// Alignment parameters. The defaults follow the validated settings:
/// `β = 3·10⁻³` with a bounded square label window.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    /// Smoothness weight β ≥ 0.
    pub beta: f64,
    /// Displacement window: labels satisfy `‖w‖∞ ≤ label_radius` (cells).
    pub label_radius: u32,
    /// Synchronous message sweeps, ≥ 1.
    pub bp_iterations: u32,
    /// Message damping in `[0, 1)`; 0 disables damping.
    pub damping: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            beta: 3e-3,
            label_radius: 8,
            bp_iterations: 50,
            damping: 0.5,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bp_iterations < 1 {
            return Err(Error::invalid("bp_iterations must be ≥ 1"));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::invalid("beta must be ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::invalid("damping must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Decomposition of the alignment energy. `total` always equals
/// `data_term + beta·smoothness_term` by construction (β is excluded from
/// the stored smoothness term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<S> {
    pub data_term: S,
    pub smoothness_term: S,
    pub total: S,
}

impl<S: Scalar> EnergyBreakdown<S> {
    pub fn new(data_term: S, smoothness_term: S, beta: S) -> Self {
        EnergyBreakdown {
            data_term,
            smoothness_term,
            total: data_term + beta * smoothness_term,
        }
    }

    pub fn to_f64(self) -> EnergyBreakdown<f64> {
        EnergyBreakdown {
            data_term: self.data_term.to_f64_c(),
            smoothness_term: self.smoothness_term.to_f64_c(),
            total: self.total.to_f64_c(),
        }
    }
}

/// Evaluates the alignment energy of `flow` between two same-shape grids.
pub fn flow_energy<S: Scalar>(
    src: &FeatureGrid<S>,
    tgt: &FeatureGrid<S>,
    flow: &FlowField,
    beta: S,
) -> Result<EnergyBreakdown<S>> {
    if src.height() != tgt.height() || src.width() != tgt.width() || src.dim() != tgt.dim() {
        return Err(Error::mismatch(format!(
            "grids {}×{}×{} vs {}×{}×{}",
            src.height(),
            src.width(),
            src.dim(),
            tgt.height(),
            tgt.width(),
            tgt.dim()
        )));
    }
    if flow.height() != src.height() || flow.width() != src.width() {
        return Err(Error::mismatch(format!(
            "flow {}×{} vs grid {}×{}",
            flow.height(),
            flow.width(),
            src.height(),
            src.width()
        )));
    }

    let mut data = S::zero();
    for i in 0..src.height() {
        for j in 0..src.width() {
            let (dy, dx) = flow.displacement(i, j);
            let ti = (i as i64 + dy as i64) as usize;
            let tj = (j as i64 + dx as i64) as usize;
            data += feature_distance(src.descriptor(i, j), tgt.descriptor(ti, tj));
        }
    }

    let mut smooth = S::zero();
    for i in 0..src.height() {
        for j in 0..src.width() {
            let (dy, dx) = flow.displacement(i, j);
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni < src.height() && nj < src.width() {
                    let (ny, nx) = flow.displacement(ni, nj);
                    let ddy = S::from_f64_c((dy - ny) as f64);
                    let ddx = S::from_f64_c((dx - nx) as f64);
                    smooth += ddy * ddy + ddx * ddx;
                }
            }
        }
    }

    Ok(EnergyBreakdown::new(data, smooth, beta))
}

/// Euclidean (unsquared) norm of the feature difference.
pub(crate) fn feature_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Ascending stable order of alignment results by deformation energy — the
/// smoothness term alone, β excluded. Returns indices into `results`.
pub fn rank_by_deformation<S: Scalar>(results: &[EnergyBreakdown<S>]) -> Result<Vec<usize>> {
    if results.is_empty() {
        return Err(Error::invalid("rank_by_deformation needs ≥ 1 result"));
    }
    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| {
        results[a]
            .smoothness_term
            .partial_cmp(&results[b].smoothness_term)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(order)
}

/// Coordinate-wise median transfer: for each keypoint name, the median over
/// the first `top_n` prediction sets (in the given ranking) where that
/// keypoint is visible. An even count averages the two middle values; a
/// keypoint visible in no set is marked not visible.
pub fn aggregate_median(predictions: &[KeypointSet], top_n: usize) -> Result<KeypointSet> {
    if predictions.is_empty() {
        return Err(Error::invalid("aggregate_median needs ≥ 1 prediction set"));
    }
    let mut out = KeypointSet::new(predictions[0].image_id.clone(), predictions[0].bbox);
    let mut names: Vec<&String> = predictions.iter().flat_map(|p| p.points.keys()).collect();
    names.sort_unstable();
    names.dedup();

    for name in names {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for set in predictions {
            if xs.len() == top_n {
                break;
            }
            if let Some(kp) = set.points.get(name) {
                if kp.visible {
                    xs.push(kp.x);
                    ys.push(kp.y);
                }
            }
        }
        let kp = if xs.is_empty() {
            Keypoint {
                x: 0.0,
                y: 0.0,
                visible: false,
            }
        } else {
            Keypoint {
                x: median(&mut xs),
                y: median(&mut ys),
                visible: true,
            }
        };
        out.insert(name.clone(), kp);
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests;
