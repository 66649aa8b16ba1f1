//! Flow-field binary container (DCFW), little-endian: magic `DCFW`,
//! version u32 = 1, h u32, w u32, label_radius u32, then `h·w` pairs of
//! i16 `(dy, dx)`, then the energies as three f64
//! (data, smoothness, total).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{EnergyBreakdown, FlowField};

pub const FLOW_MAGIC: [u8; 4] = *b"DCFW";
pub const FLOW_VERSION: u32 = 1;

pub fn write_flow(
    flow: &FlowField,
    energy: &EnergyBreakdown<f64>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&FLOW_MAGIC)?;
    w.write_all(&FLOW_VERSION.to_le_bytes())?;
    for v in [
        flow.height() as u32,
        flow.width() as u32,
        flow.label_radius(),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for &(dy, dx) in flow.displacements() {
        w.write_all(&dy.to_le_bytes())?;
        w.write_all(&dx.to_le_bytes())?;
    }
    for v in [energy.data_term, energy.smoothness_term, energy.total] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_flow(path: impl AsRef<Path>) -> Result<(FlowField, EnergyBreakdown<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated { expected: 4, got: 0 })?;
    if magic != FLOW_MAGIC {
        return Err(Error::BadMagic {
            expected: FLOW_MAGIC,
            found: magic,
        });
    }
    let version = read_u32(&mut r)?;
    if version != FLOW_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let h = read_u32(&mut r)? as u64;
    let w = read_u32(&mut r)? as u64;
    let radius = read_u32(&mut r)?;
    let count = h
        .checked_mul(w)
        .filter(|&n| n <= (usize::MAX as u64) / 4)
        .ok_or_else(|| Error::DimensionOverflow(format!("{h}×{w} cells")))? as usize;

    let mut payload = vec![0u8; count * 4];
    r.read_exact(&mut payload).map_err(|_| Error::Truncated {
        expected: (count * 4) as u64,
        got: 0,
    })?;
    let d: Vec<(i16, i16)> = payload
        .chunks_exact(4)
        .map(|c| {
            (
                i16::from_le_bytes([c[0], c[1]]),
                i16::from_le_bytes([c[2], c[3]]),
            )
        })
        .collect();

    let mut energies = [0f64; 3];
    for e in &mut energies {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)
            .map_err(|_| Error::Truncated { expected: 8, got: 0 })?;
        *e = f64::from_le_bytes(buf);
        if !e.is_finite() {
            return Err(Error::NonFinite(0));
        }
    }

    let flow = FlowField::from_vec(h as usize, w as usize, radius, d)?;
    Ok((
        flow,
        EnergyBreakdown {
            data_term: energies[0],
            smoothness_term: energies[1],
            total: energies[2],
        },
    ))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Truncated { expected: 4, got: 0 })?;
    Ok(u32::from_le_bytes(buf))
}
