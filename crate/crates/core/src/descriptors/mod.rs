//! Dense gradient-orientation descriptors, global image descriptors, and an
//! exact cosine-similarity k-nearest-neighbor index.
//!
//! The dense descriptor is an upright, unweighted bilinearly-binned gradient
//! histogram over a square support: `spatial_bins²` cells of
//! `orientation_bins` orientations each, L2-normalized per descriptor. It
//! stands in for library dense SIFT; matching any specific implementation's
//! values is a non-goal.

use crate::error::{Error, Result};
use crate::gridgeom::{FeatureGrid, GridGeometry, Rational};
use crate::imgutil::GrayF32;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct DenseDescriptorConfig {
    /// Cell-to-cell step in pixels.
    pub grid_stride: u32,
    /// Half-width of the square support; rf side is `2·radius + 1`.
    pub radius: u32,
    /// Spatial bins per axis.
    pub spatial_bins: usize,
    /// Orientation bins over `[0, 2π)`.
    pub orientation_bins: usize,
}

impl Default for DenseDescriptorConfig {
    fn default() -> Self {
        DenseDescriptorConfig {
            grid_stride: 8,
            radius: 20,
            spatial_bins: 4,
            orientation_bins: 8,
        }
    }
}

impl DenseDescriptorConfig {
    pub fn dim(&self) -> usize {
        self.spatial_bins * self.spatial_bins * self.orientation_bins
    }

    fn validate(&self) -> Result<()> {
        if self.grid_stride < 1 || self.spatial_bins < 1 || self.orientation_bins < 1 {
            return Err(Error::invalid("descriptor config fields must be ≥ 1"));
        }
        if (self.radius as usize) < self.spatial_bins {
            return Err(Error::invalid(format!(
                "radius {} must be ≥ spatial_bins {}",
                self.radius, self.spatial_bins
            )));
        }
        Ok(())
    }
}

/// Dense descriptors over a regular grid. The grid geometry has
/// `stride = grid_stride`, `rf_size = 2·radius + 1`, `center_offset = radius`;
/// every cell's support lies inside the image.
pub fn dense_descriptors(image: &GrayF32, config: &DenseDescriptorConfig) -> Result<FeatureGrid<f32>> {
    config.validate()?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let side = 2 * config.radius as usize + 1;
    if w < side || h < side {
        return Err(Error::invalid(format!(
            "image {w}×{h} smaller than descriptor support {side}×{side}"
        )));
    }
    let cells = |extent: usize| (extent - 1 - 2 * config.radius as usize) / config.grid_stride as usize + 1;
    let (gw, gh) = (cells(w), cells(h));
    let geometry = GridGeometry::new(
        config.grid_stride,
        side as u32,
        Rational::from_integer(config.radius as i64),
    )?;

    let (gx, gy) = gradients(image);
    let r = config.radius as i64;
    let nb = config.spatial_bins;
    let ob = config.orientation_bins;
    let dim = config.dim();

    FeatureGrid::from_fn(gh, gw, dim, geometry, String::new(), |i, j| {
        let (cx, cy) = geometry.rf_center_f64((i, j));
        let (cx, cy) = (cx as i64, cy as i64);
        let mut hist = vec![0f32; dim];
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                let idx = (y as usize) * w + x as usize;
                let (dx, dy) = (gx[idx], gy[idx]);
                let mag = (dx * dx + dy * dy).sqrt();
                if mag == 0.0 {
                    continue;
                }
                let mut theta = dy.atan2(dx);
                if theta < 0.0 {
                    theta += 2.0 * std::f32::consts::PI;
                }
                let u = bin_coord((x - (cx - r)) as f32, side, nb);
                let v = bin_coord((y - (cy - r)) as f32, side, nb);
                let o = theta / (2.0 * std::f32::consts::PI) * ob as f32;
                splat(&mut hist, nb, ob, u, v, o, mag);
            }
        }
        l2_normalize(&mut hist);
        hist
    })
}

/// Continuous spatial-bin coordinate of a local offset `a ∈ [0, side)`.
/// Symmetric: `coord(side−1−a) = (bins−1) − coord(a)`.
fn bin_coord(a: f32, side: usize, bins: usize) -> f32 {
    (a + 0.5) * bins as f32 / side as f32 - 0.5
}

fn splat(hist: &mut [f32], nb: usize, ob: usize, u: f32, v: f32, o: f32, mag: f32) {
    let u0 = u.floor();
    let v0 = v.floor();
    let o0 = o.floor();
    let (fu, fv, fo) = (u - u0, v - v0, o - o0);
    for (du, wu) in [(0i64, 1.0 - fu), (1, fu)] {
        let ub = u0 as i64 + du;
        if ub < 0 || ub >= nb as i64 || wu == 0.0 {
            continue;
        }
        for (dv, wv) in [(0i64, 1.0 - fv), (1, fv)] {
            let vb = v0 as i64 + dv;
            if vb < 0 || vb >= nb as i64 || wv == 0.0 {
                continue;
            }
            for (do_, wo) in [(0i64, 1.0 - fo), (1, fo)] {
                let obin = (o0 as i64 + do_).rem_euclid(ob as i64);
                let slot = (vb as usize * nb + ub as usize) * ob + obin as usize;
                hist[slot] += mag * wu * wv * wo;
            }
        }
    }
}

fn l2_normalize(v: &mut [f32]) {
    let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Central-difference gradients with clamped borders.
fn gradients(image: &GrayF32) -> (Vec<f32>, Vec<f32>) {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let get = |x: i64, y: i64| crate::imgutil::sample_clamped(image, x, y);
    let mut gx = vec![0f32; (w * h) as usize];
    let mut gy = vec![0f32; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            gx[idx] = 0.5 * (get(x + 1, y) - get(x - 1, y));
            gy[idx] = 0.5 * (get(x, y + 1) - get(x, y - 1));
        }
    }
    (gx, gy)
}

/// Cosine similarity; zero vectors are defined as similarity 0 and flagged.
pub fn cosine_flagged<S: Scalar>(a: &[S], b: &[S]) -> (S, bool) {
    assert_eq!(a.len(), b.len(), "cosine over mismatched dimensions");
    let mut dot = S::zero();
    let mut na = S::zero();
    let mut nb = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na.is_zero() || nb.is_zero() {
        return (S::zero(), true);
    }
    (dot / (na.sqrt() * nb.sqrt()), false)
}

/// Cosine similarity in `[−1, 1]`; 0 for zero vectors.
pub fn cosine<S: Scalar>(a: &[S], b: &[S]) -> S {
    cosine_flagged(a, b).0
}

/// Whole-image descriptor with unit L2 norm, used for neighbor retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDescriptor {
    pub id: String,
    pub vector: Vec<f32>,
}

impl GlobalDescriptor {
    /// Normalizes `vector` to unit length. Zero vectors are rejected.
    pub fn new(id: impl Into<String>, mut vector: Vec<f32>) -> Result<Self> {
        let norm = vector.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("global descriptor must be nonzero and finite"));
        }
        for x in &mut vector {
            *x /= norm;
        }
        Ok(GlobalDescriptor {
            id: id.into(),
            vector,
        })
    }

    /// Reads a global descriptor from a 1×1 DCFG grid.
    pub fn from_grid(grid: &FeatureGrid<f32>) -> Result<Self> {
        if grid.height() != 1 || grid.width() != 1 {
            return Err(Error::mismatch(format!(
                "global descriptor grid must be 1×1, got {}×{}",
                grid.height(),
                grid.width()
            )));
        }
        Self::new(grid.source_id(), grid.data().to_vec())
    }

    /// Stores the descriptor as a 1×1 DCFG grid.
    pub fn to_grid(&self) -> FeatureGrid<f32> {
        FeatureGrid::new(
            1,
            1,
            self.vector.len(),
            GridGeometry::identity(),
            self.vector.clone(),
            self.id.clone(),
        )
        .expect("unit vector is finite")
    }

    /// Mean-pooled, L2-normalized summary of a feature grid.
    pub fn mean_pool(grid: &FeatureGrid<f32>) -> Result<Self> {
        let mut acc = vec![0f64; grid.dim()];
        for i in 0..grid.height() {
            for j in 0..grid.width() {
                for (a, &v) in acc.iter_mut().zip(grid.descriptor(i, j)) {
                    *a += v as f64;
                }
            }
        }
        let n = (grid.height() * grid.width()) as f64;
        Self::new(
            grid.source_id(),
            acc.into_iter().map(|v| (v / n) as f32).collect(),
        )
    }
}

/// Exhaustive cosine-similarity index over unit vectors.
#[derive(Debug, Clone, Default)]
pub struct NNIndex<S> {
    entries: Vec<(String, Vec<S>)>,
}

impl<S: Scalar> NNIndex<S> {
    pub fn new() -> Self {
        NNIndex {
            entries: Vec::new(),
        }
    }

    /// Inserts a vector, normalized to unit length. Zero vectors are rejected.
    pub fn push(&mut self, id: impl Into<String>, vector: &[S]) -> Result<()> {
        let norm = vector.iter().map(|&x| x * x).sum::<S>().sqrt();
        if norm.is_zero() || !norm.is_finite() {
            return Err(Error::invalid("index vectors must be nonzero and finite"));
        }
        self.entries
            .push((id.into(), vector.iter().map(|&x| x / norm).collect()));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    /// Top-`k` entries by descending cosine similarity, exhaustive and exact.
    /// Ties keep insertion order.
    pub fn knn(&self, query: &[S], k: usize) -> Result<Vec<(String, S)>> {
        if self.entries.is_empty() {
            return Err(Error::invalid("knn on an empty index"));
        }
        if k > self.entries.len() {
            return Err(Error::invalid(format!(
                "k={k} exceeds index size {}",
                self.entries.len()
            )));
        }
        let mut scored: Vec<(usize, S)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, (_, v))| (idx, cosine(query, v)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(idx, s)| (self.entries[idx].0.clone(), s))
            .collect())
    }
}
