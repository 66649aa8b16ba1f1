use std::path::Path;

use anyhow::{Context, Result};
use densecorr::imgutil::GrayF32;
use image::RgbImage;

/// Writes via a temp file in the same directory, then renames into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Runs a writer against a temp path in the target directory, then renames
/// the result into place.
pub fn write_atomic_with(
    path: impl AsRef<Path>,
    write: impl FnOnce(&Path) -> Result<()>,
) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy()
    ));
    write(&tmp)?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Saves a PNG atomically.
pub fn save_png_atomic(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let mut buf = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut buf),
        image::ImageFormat::Png,
    )?;
    write_atomic(path, &buf)
}

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    Ok(image::open(path)
        .with_context(|| format!("loading image {}", path.display()))?
        .to_rgb8())
}

pub fn load_gray_f32(path: impl AsRef<Path>) -> Result<GrayF32> {
    Ok(densecorr::imgutil::rgb_to_gray_f32(&load_rgb(path)?))
}

/// Loads a DCFG grid as f64 for optimization.
pub fn load_grid_f64(path: impl AsRef<Path>) -> Result<densecorr::FeatureGrid64> {
    let path = path.as_ref();
    let grid = densecorr::gridgeom::read_grid(path)
        .with_context(|| format!("reading grid {}", path.display()))?;
    Ok(grid.convert::<f64>())
}
