//! Flow application in pixel space: bilinear upsampling of the cell flow to
//! a dense pixel displacement field, bicubic (Catmull-Rom) image resampling,
//! and keypoint transfer.

use image::RgbImage;

use crate::evalviz::KeypointSet;
use crate::gridgeom::{ratio_to_f64, GridGeometry};
use crate::imgutil::{to_u8, GrayF32};

use super::FlowField;

/// Pixel-space displacement at `(x, y)`: the cell flow (in cells) bilinearly
/// interpolated between rf centers and scaled by the stride. Positions
/// outside the cell-center lattice clamp to the border cells.
pub fn pixel_flow_at(flow: &FlowField, geometry: &GridGeometry, x: f64, y: f64) -> (f64, f64) {
    let offset = ratio_to_f64(geometry.center_offset);
    let stride = geometry.stride as f64;
    let u = ((x - offset) / stride).clamp(0.0, (flow.width() - 1) as f64);
    let v = ((y - offset) / stride).clamp(0.0, (flow.height() - 1) as f64);
    let j0 = u.floor() as usize;
    let i0 = v.floor() as usize;
    let j1 = (j0 + 1).min(flow.width() - 1);
    let i1 = (i0 + 1).min(flow.height() - 1);
    let fu = u - j0 as f64;
    let fv = v - i0 as f64;

    let at = |i: usize, j: usize| -> (f64, f64) {
        let (dy, dx) = flow.displacement(i, j);
        (dx as f64 * stride, dy as f64 * stride)
    };
    let (x00, y00) = at(i0, j0);
    let (x01, y01) = at(i0, j1);
    let (x10, y10) = at(i1, j0);
    let (x11, y11) = at(i1, j1);
    let wx = (1.0 - fv) * ((1.0 - fu) * x00 + fu * x01) + fv * ((1.0 - fu) * x10 + fu * x11);
    let wy = (1.0 - fv) * ((1.0 - fu) * y00 + fu * y01) + fv * ((1.0 - fu) * y10 + fu * y11);
    (wx, wy)
}

/// Catmull-Rom cubic through four samples; reproduces `p1` exactly at t = 0.
fn catmull(p0: f32, p1: f32, p2: f32, p3: f32, t: f32) -> f32 {
    p1 + 0.5
        * t
        * ((p2 - p0)
            + t * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + t * (3.0 * (p1 - p2) + p3 - p0)))
}

fn catmull_sample(get: impl Fn(i64, i64) -> f32, x: f64, y: f64) -> f32 {
    let x0 = x.floor();
    let y0 = y.floor();
    let tx = (x - x0) as f32;
    let ty = (y - y0) as f32;
    let (xi, yi) = (x0 as i64, y0 as i64);
    let mut rows = [0f32; 4];
    for (k, row) in rows.iter_mut().enumerate() {
        let yy = yi - 1 + k as i64;
        *row = catmull(
            get(xi - 1, yy),
            get(xi, yy),
            get(xi + 1, yy),
            get(xi + 2, yy),
            tx,
        );
    }
    catmull(rows[0], rows[1], rows[2], rows[3], ty)
}

/// Warps `target` toward the source frame: each output pixel `x` samples the
/// target at `x + w_px(x)` with bicubic interpolation, clamping out-of-bounds
/// samples to the edge. Zero flow reproduces the input exactly.
pub fn warp_rgb(target: &RgbImage, flow: &FlowField, geometry: &GridGeometry) -> RgbImage {
    let (w, h) = (target.width(), target.height());
    let mut out = RgbImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (wx, wy) = pixel_flow_at(flow, geometry, x as f64, y as f64);
            let (sx, sy) = (x as f64 + wx, y as f64 + wy);
            let px = out.get_pixel_mut(x, y);
            for c in 0..3 {
                let v = catmull_sample(
                    |ix, iy| {
                        let cx = ix.clamp(0, w as i64 - 1) as u32;
                        let cy = iy.clamp(0, h as i64 - 1) as u32;
                        target.get_pixel(cx, cy).0[c] as f32
                    },
                    sx,
                    sy,
                );
                px.0[c] = to_u8(v);
            }
        }
    }
    out
}

/// [`warp_rgb`] for a grayscale f32 plane; samples are not clamped to u8.
pub fn warp_gray(target: &GrayF32, flow: &FlowField, geometry: &GridGeometry) -> GrayF32 {
    let (w, h) = (target.width(), target.height());
    let mut out = GrayF32::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let (wx, wy) = pixel_flow_at(flow, geometry, x as f64, y as f64);
            let v = catmull_sample(
                |ix, iy| crate::imgutil::sample_clamped(target, ix, iy),
                x as f64 + wx,
                y as f64 + wy,
            );
            out.get_pixel_mut(x, y).0[0] = v;
        }
    }
    out
}

/// Moves each visible source-frame keypoint `x` to `x + w_px(x)`; visibility
/// flags, the image id, and the bbox are carried over unchanged.
pub fn transfer_keypoints(
    keypoints: &KeypointSet,
    flow: &FlowField,
    geometry: &GridGeometry,
) -> KeypointSet {
    let mut out = keypoints.clone();
    for kp in out.points.values_mut() {
        if kp.visible {
            let (wx, wy) = pixel_flow_at(flow, geometry, kp.x, kp.y);
            kp.x += wx;
            kp.y += wy;
        }
    }
    out
}
