//! Patch-level feature visualizations: nearest-neighbor patch
//! reconstruction, the uniform-rf control, and receptive-field averaging.

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descriptors::cosine;
use crate::error::{Error, Result};
use crate::gridgeom::{FeatureGrid, GridGeometry};

struct DbEntry {
    image: usize,
    /// rf center in pixels.
    center: (f64, f64),
    feature: Vec<f32>,
}

/// Database of dense patches: per grid cell, the descriptor plus enough
/// provenance to cut the stride-sized center patch or the full rf crop from
/// the source image. Only cells whose center patch lies fully inside the
/// image are indexed.
pub struct PatchDatabase {
    geometry: GridGeometry,
    dim: usize,
    ids: Vec<String>,
    images: Vec<RgbImage>,
    entries: Vec<DbEntry>,
}

impl PatchDatabase {
    pub fn build(items: Vec<(String, RgbImage, FeatureGrid<f32>)>) -> Result<Self> {
        let (first_geom, first_dim) = match items.first() {
            Some((_, _, grid)) => (*grid.geometry(), grid.dim()),
            None => return Err(Error::invalid("patch database needs at least one image")),
        };
        let mut db = PatchDatabase {
            geometry: first_geom,
            dim: first_dim,
            ids: Vec::new(),
            images: Vec::new(),
            entries: Vec::new(),
        };
        for (id, image, grid) in items {
            if *grid.geometry() != first_geom || grid.dim() != first_dim {
                return Err(Error::mismatch(format!(
                    "grid of {id:?} disagrees with the database geometry"
                )));
            }
            let img_idx = db.images.len();
            for i in 0..grid.height() {
                for j in 0..grid.width() {
                    if !patch_in_bounds(&first_geom, (i, j), &image) {
                        continue;
                    }
                    db.entries.push(DbEntry {
                        image: img_idx,
                        center: first_geom.rf_center_f64((i, j)),
                        feature: grid.descriptor(i, j).to_vec(),
                    });
                }
            }
            db.ids.push(id);
            db.images.push(image);
        }
        if db.entries.is_empty() {
            return Err(Error::invalid("patch database has no in-bounds patches"));
        }
        Ok(db)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Source image id of entry `idx`.
    pub fn entry_source(&self, idx: usize) -> &str {
        &self.ids[self.entries[idx].image]
    }

    /// Entry provenance and descriptor: `(source id, rf center, feature)`.
    pub fn entry(&self, idx: usize) -> (&str, (f64, f64), &[f32]) {
        let e = &self.entries[idx];
        (&self.ids[e.image], e.center, &e.feature)
    }

    /// Indices of the `k` entries nearest to `feature` by cosine similarity,
    /// descending; exact ties keep insertion order.
    pub fn k_nearest(&self, feature: &[f32], k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.entries.len() {
            return Err(Error::invalid(format!(
                "k={k} out of range for database of {}",
                self.entries.len()
            )));
        }
        if feature.len() != self.dim {
            return Err(Error::mismatch(format!(
                "query dim {} vs database dim {}",
                feature.len(),
                self.dim
            )));
        }
        let mut scored: Vec<(usize, f32)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, cosine(feature, &e.feature)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        Ok(scored.into_iter().take(k).map(|(i, _)| i).collect())
    }

    fn center_patch(&self, idx: usize) -> RgbImage {
        let e = &self.entries[idx];
        let img = &self.images[e.image];
        let s = self.geometry.stride;
        let (x0, y0) = patch_origin(&self.geometry, e.center);
        let mut out = RgbImage::new(s, s);
        for dy in 0..s {
            for dx in 0..s {
                *out.get_pixel_mut(dx, dy) = *img.get_pixel(x0 as u32 + dx, y0 as u32 + dy);
            }
        }
        out
    }

    /// Full rf crop around an entry's center, edge-clamped at image borders.
    fn rf_crop(&self, idx: usize) -> RgbImage {
        let e = &self.entries[idx];
        let img = &self.images[e.image];
        let rf = self.geometry.rf_size;
        let half = (rf as f64 - 1.0) / 2.0;
        let x0 = (e.center.0 - half).floor() as i64;
        let y0 = (e.center.1 - half).floor() as i64;
        let mut out = RgbImage::new(rf, rf);
        for dy in 0..rf {
            for dx in 0..rf {
                let x = (x0 + dx as i64).clamp(0, img.width() as i64 - 1) as u32;
                let y = (y0 + dy as i64).clamp(0, img.height() as i64 - 1) as u32;
                *out.get_pixel_mut(dx, dy) = *img.get_pixel(x, y);
            }
        }
        out
    }
}

fn patch_origin(geometry: &GridGeometry, center: (f64, f64)) -> (i64, i64) {
    let half = geometry.stride as f64 / 2.0;
    ((center.0 - half).floor() as i64, (center.1 - half).floor() as i64)
}

fn patch_in_bounds(geometry: &GridGeometry, cell: (usize, usize), img: &RgbImage) -> bool {
    let center = geometry.rf_center_f64(cell);
    let (x0, y0) = patch_origin(geometry, center);
    let s = geometry.stride as i64;
    x0 >= 0 && y0 >= 0 && x0 + s <= img.width() as i64 && y0 + s <= img.height() as i64
}

/// Replaces every stride-sized center patch of `image` with the pixel mean of
/// its `k` nearest database patches, matched by cosine similarity on the
/// cell's descriptor. Patches that stick out of the image are left untouched;
/// output dimensions equal input dimensions.
pub fn patch_reconstruction(
    image: &RgbImage,
    features: &FeatureGrid<f32>,
    db: &PatchDatabase,
    k: usize,
) -> Result<RgbImage> {
    if features.dim() != db.dim() {
        return Err(Error::mismatch(format!(
            "feature dim {} vs database dim {}",
            features.dim(),
            db.dim()
        )));
    }
    let geometry = *features.geometry();
    let mut out = image.clone();
    let s = geometry.stride;
    for i in 0..features.height() {
        for j in 0..features.width() {
            if !patch_in_bounds(&geometry, (i, j), image) {
                continue;
            }
            let nearest = db.k_nearest(features.descriptor(i, j), k)?;
            let mut acc = vec![0f32; (s * s * 3) as usize];
            for &idx in &nearest {
                let patch = db.center_patch(idx);
                for (a, &p) in acc.iter_mut().zip(patch.as_raw()) {
                    *a += p as f32;
                }
            }
            let (x0, y0) = patch_origin(&geometry, geometry.rf_center_f64((i, j)));
            let kf = nearest.len() as f32;
            for dy in 0..s {
                for dx in 0..s {
                    let base = ((dy * s + dx) * 3) as usize;
                    let px = out.get_pixel_mut(x0 as u32 + dx, y0 as u32 + dy);
                    for c in 0..3 {
                        px.0[c] = crate::imgutil::to_u8(acc[base + c] / kf);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Control for patch reconstruction: each center patch is replaced by a patch
/// drawn uniformly at random from the rf-sized neighborhood around the
/// corresponding location in a random database image. Deterministic given
/// `seed`.
pub fn uniform_rf_baseline(
    image: &RgbImage,
    geometry: &GridGeometry,
    db: &PatchDatabase,
    seed: u64,
) -> Result<RgbImage> {
    if db.images.is_empty() {
        return Err(Error::invalid("uniform baseline needs database images"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    let s = geometry.stride;
    let half = (geometry.rf_size as i64 - 1) / 2;
    // generous bound on the cell lattice; out-of-bounds patches are skipped
    let gw = (image.width() / s + 2) as usize;
    let gh = (image.height() / s + 2) as usize;
    for i in 0..gh {
        for j in 0..gw {
            if !patch_in_bounds(geometry, (i, j), image) {
                continue;
            }
            let center = geometry.rf_center_f64((i, j));
            let src = &db.images[rng.gen_range(0..db.images.len())];
            let (ox, oy) = (
                rng.gen_range(-half..=half),
                rng.gen_range(-half..=half),
            );
            let (x0, y0) = patch_origin(geometry, (center.0 + ox as f64, center.1 + oy as f64));
            let x0 = x0.clamp(0, src.width() as i64 - s as i64);
            let y0 = y0.clamp(0, src.height() as i64 - s as i64);
            let (tx, ty) = patch_origin(geometry, center);
            for dy in 0..s {
                for dx in 0..s {
                    *out.get_pixel_mut(tx as u32 + dx, ty as u32 + dy) =
                        *src.get_pixel(x0 as u32 + dx, y0 as u32 + dy);
                }
            }
        }
    }
    Ok(out)
}

/// Mean of the `k` database rf crops nearest to `seed_feature`, then affine
/// contrast expansion to the full `[0, 255]` range (a constant mean maps to
/// mid-gray 128).
pub fn rf_average(seed_feature: &[f32], db: &PatchDatabase, k: usize) -> Result<RgbImage> {
    let nearest = db.k_nearest(seed_feature, k)?;
    let rf = db.geometry.rf_size;
    let mut acc = vec![0f64; (rf * rf * 3) as usize];
    for &idx in &nearest {
        let crop = db.rf_crop(idx);
        for (a, &p) in acc.iter_mut().zip(crop.as_raw()) {
            *a += p as f64;
        }
    }
    for a in &mut acc {
        *a /= k as f64;
    }
    let lo = acc.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = RgbImage::new(rf, rf);
    for (slot, px) in out.pixels_mut().enumerate() {
        for c in 0..3 {
            let v = acc[slot * 3 + c];
            px.0[c] = if hi > lo {
                crate::imgutil::to_u8(((v - lo) / (hi - lo) * 255.0) as f32)
            } else {
                128
            };
        }
    }
    Ok(out)
}
