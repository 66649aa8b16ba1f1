//! Feature-grid binary container (DCFG), little-endian:
//! magic `DCFG`, version u32 = 1, h u32, w u32, d u32, stride u32,
//! rf_size u32, center_offset f64, then `h·w·d` IEEE-754 f32 values,
//! row-major, descriptor innermost.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{ratio_to_f64, rational_from_f64, FeatureGrid, GridGeometry};

pub const GRID_MAGIC: [u8; 4] = *b"DCFG";
pub const GRID_VERSION: u32 = 1;

/// Writes a grid to `path` in the DCFG container.
pub fn write_grid(grid: &FeatureGrid<f32>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&GRID_MAGIC)?;
    w.write_all(&GRID_VERSION.to_le_bytes())?;
    for v in [
        grid.height() as u32,
        grid.width() as u32,
        grid.dim() as u32,
        grid.geometry().stride,
        grid.geometry().rf_size,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&ratio_to_f64(grid.geometry().center_offset).to_le_bytes())?;
    for v in grid.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a DCFG grid. The grid's `source_id` is taken from the file stem.
pub fn read_grid(path: impl AsRef<Path>) -> Result<FeatureGrid<f32>> {
    let path = path.as_ref();
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated { expected: 4, got: 0 })?;
    if magic != GRID_MAGIC {
        return Err(Error::BadMagic {
            expected: GRID_MAGIC,
            found: magic,
        });
    }
    let version = read_u32(&mut r)?;
    if version != GRID_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let h = read_u32(&mut r)? as u64;
    let w = read_u32(&mut r)? as u64;
    let d = read_u32(&mut r)? as u64;
    let stride = read_u32(&mut r)?;
    let rf_size = read_u32(&mut r)?;
    let offset_raw = read_f64(&mut r)?;
    if !offset_raw.is_finite() {
        return Err(Error::NonFinite(0));
    }
    let center_offset = rational_from_f64(offset_raw).ok_or_else(|| {
        Error::invalid(format!("center_offset {offset_raw} is not a dyadic rational"))
    })?;

    let count = h
        .checked_mul(w)
        .and_then(|hw| hw.checked_mul(d))
        .filter(|&n| n <= (usize::MAX as u64) / 4)
        .ok_or_else(|| Error::DimensionOverflow(format!("{h}×{w}×{d} elements")))? as usize;

    let mut payload = vec![0u8; count * 4];
    let mut got = 0usize;
    while got < payload.len() {
        match r.read(&mut payload[got..])? {
            0 => {
                return Err(Error::Truncated {
                    expected: (count * 4) as u64,
                    got: got as u64,
                })
            }
            n => got += n,
        }
    }
    let mut data = Vec::with_capacity(count);
    for (idx, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite(idx));
        }
        data.push(v);
    }

    let geometry = GridGeometry::new(stride, rf_size, center_offset)?;
    FeatureGrid::new(h as usize, w as usize, d as usize, geometry, data, source_id)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Truncated { expected: 4, got: 0 })?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Truncated { expected: 8, got: 0 })?;
    Ok(f64::from_le_bytes(buf))
}
