//! Keypoint annotation files: comma-separated text, one record per image,
//! `image_id,bbox_x,bbox_y,bbox_w,bbox_h` followed by `name,x,y,visible`
//! tuples. A header line is required.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{BoundingBox, Keypoint, KeypointSet, PckReport};

const HEADER: &str = "image_id,bbox_x,bbox_y,bbox_w,bbox_h,name,x,y,visible";

pub fn write_annotations(path: impl AsRef<Path>, sets: &[KeypointSet]) -> Result<()> {
    let mut out = String::from(HEADER);
    out.push('\n');
    for set in sets {
        set.validate()?;
        if set.image_id.contains(',') {
            return Err(Error::invalid(format!(
                "image id {:?} must not contain commas",
                set.image_id
            )));
        }
        out.push_str(&format!(
            "{},{},{},{},{}",
            set.image_id, set.bbox.x, set.bbox.y, set.bbox.w, set.bbox.h
        ));
        for (name, kp) in &set.points {
            if name.contains(',') {
                return Err(Error::invalid(format!(
                    "keypoint name {name:?} must not contain commas"
                )));
            }
            out.push_str(&format!(
                ",{},{},{},{}",
                name,
                kp.x,
                kp.y,
                if kp.visible { 1 } else { 0 }
            ));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<KeypointSet>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.starts_with("image_id,") => {}
        _ => return Err(Error::parse(1, "missing annotation header line")),
    }

    let mut sets = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 || !(fields.len() - 5).is_multiple_of(4) {
            return Err(Error::parse(
                lineno,
                format!("expected 5 + 4k fields, got {}", fields.len()),
            ));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("bad {what}: {s:?}")))
        };
        let bbox = BoundingBox {
            x: num(fields[1], "bbox_x")?,
            y: num(fields[2], "bbox_y")?,
            w: num(fields[3], "bbox_w")?,
            h: num(fields[4], "bbox_h")?,
        };
        let mut set = KeypointSet::new(fields[0], bbox);
        for chunk in fields[5..].chunks_exact(4) {
            let visible = match chunk[3] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(lineno, format!("bad visible flag {other:?}"))),
            };
            set.insert(
                chunk[0],
                Keypoint {
                    x: num(chunk[1], "keypoint x")?,
                    y: num(chunk[2], "keypoint y")?,
                    visible,
                },
            );
        }
        set.validate()
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        sets.push(set);
    }
    Ok(sets)
}

/// Writes per-type PCK rows, one line per report: columns are the union of
/// keypoint types (sorted), then the mean.
pub fn write_pck_csv(path: impl AsRef<Path>, reports: &[PckReport]) -> Result<()> {
    let mut types: Vec<&str> = Vec::new();
    for r in reports {
        for name in r.per_type.keys() {
            if !types.contains(&name.as_str()) {
                types.push(name);
            }
        }
    }
    types.sort_unstable();
    let mut out = String::from("alpha");
    for t in &types {
        out.push(',');
        out.push_str(t);
    }
    out.push_str(",mean\n");
    for r in reports {
        out.push_str(&format!("{}", r.alpha));
        for t in &types {
            match r.per_type.get(*t) {
                Some(acc) => out.push_str(&format!(",{acc:.4}")),
                None => out.push(','),
            }
        }
        out.push_str(&format!(",{:.4}\n", r.mean));
    }
    fs::write(path, out)?;
    Ok(())
}
