//! Linear-model files: a text header line `class_label dim bias` followed by
//! `dim` little-endian f64 weights, plus a text manifest mapping keypoint
//! names to model paths.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::LinearModel;

pub fn write_model(model: &LinearModel<f64>, path: impl AsRef<Path>) -> Result<()> {
    if model.class_label.contains(char::is_whitespace) || model.class_label.is_empty() {
        return Err(Error::invalid(format!(
            "class label {:?} must be non-empty without whitespace",
            model.class_label
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {} {}", model.class_label, model.weights.len(), model.bias)?;
    for v in &model.weights {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<LinearModel<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::parse(1, "model header must be `class_label dim bias`"));
    }
    let dim: usize = fields[1]
        .parse()
        .map_err(|_| Error::parse(1, format!("bad dim {:?}", fields[1])))?;
    let bias: f64 = fields[2]
        .parse()
        .map_err(|_| Error::parse(1, format!("bad bias {:?}", fields[2])))?;
    let mut payload = vec![0u8; dim * 8];
    r.read_exact(&mut payload).map_err(|_| Error::Truncated {
        expected: (dim * 8) as u64,
        got: 0,
    })?;
    let weights: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(idx) = weights.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx));
    }
    if !bias.is_finite() {
        return Err(Error::NonFinite(dim));
    }
    Ok(LinearModel {
        weights,
        bias,
        class_label: fields[0].to_string(),
    })
}

/// Writes `name<TAB>path` lines, one model per keypoint name.
pub fn write_model_manifest(
    path: impl AsRef<Path>,
    entries: &[(String, PathBuf)],
) -> Result<()> {
    let mut out = String::new();
    for (name, model_path) in entries {
        out.push_str(&format!("{name}\t{}\n", model_path.display()));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_model_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (name, p) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(idx + 1, "expected `name<TAB>path`"))?;
        entries.push((name.to_string(), PathBuf::from(p)));
    }
    Ok(entries)
}
