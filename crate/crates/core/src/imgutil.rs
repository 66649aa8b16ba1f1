//! Small image helpers shared by descriptors, warping, and visualization.

use image::{ImageBuffer, Luma, Rgb, RgbImage};

/// Grayscale plane with `f32` samples in `[0, 255]`.
pub type GrayF32 = ImageBuffer<Luma<f32>, Vec<f32>>;

/// RGB → grayscale with luma weights 0.299/0.587/0.114.
pub fn rgb_to_gray_f32(img: &RgbImage) -> GrayF32 {
    let mut out = GrayF32::new(img.width(), img.height());
    for (src, dst) in img.pixels().zip(out.pixels_mut()) {
        let Rgb([r, g, b]) = *src;
        dst.0[0] = 0.299 * r as f32 + 0.587 * g as f32 + 0.114 * b as f32;
    }
    out
}

/// Grayscale u8 image lifted to f32 samples.
pub fn gray_u8_to_f32(img: &image::GrayImage) -> GrayF32 {
    let mut out = GrayF32::new(img.width(), img.height());
    for (src, dst) in img.pixels().zip(out.pixels_mut()) {
        dst.0[0] = src.0[0] as f32;
    }
    out
}

/// Clamp-and-round an f32 sample back to u8.
pub fn to_u8(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Sample with coordinates clamped to the image bounds.
pub fn sample_clamped(img: &GrayF32, x: i64, y: i64) -> f32 {
    let xc = x.clamp(0, img.width() as i64 - 1) as u32;
    let yc = y.clamp(0, img.height() as i64 - 1) as u32;
    img.get_pixel(xc, yc).0[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_weights() {
        let mut img = RgbImage::new(1, 1);
        img.put_pixel(0, 0, Rgb([100, 50, 200]));
        let g = rgb_to_gray_f32(&img);
        let expected = 0.299 * 100.0 + 0.587 * 50.0 + 0.114 * 200.0;
        assert!((g.get_pixel(0, 0).0[0] - expected).abs() < 1e-4);
    }
}
