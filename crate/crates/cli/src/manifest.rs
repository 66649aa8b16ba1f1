//! Dataset manifest: line-oriented text, one record per line, tab-separated:
//!
//! ```text
//! image_id <TAB> image_path <TAB> layer=path[;layer=path…] <TAB> global_path <TAB> annotations_path <TAB> category <TAB> split
//! ```
//!
//! `-` marks an absent grids/global/annotations field; `split` is `train` or
//! `val`. Ids must be unique and every referenced file must exist at load
//! time.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use densecorr::evalviz::{read_annotations, KeypointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
}

impl std::str::FromStr for Split {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            other => bail!("split must be `train` or `val`, got {other:?}"),
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ManifestRecord {
    pub image_id: String,
    pub image_path: PathBuf,
    /// Feature-grid paths keyed by layer name.
    pub grids: BTreeMap<String, PathBuf>,
    pub global_path: Option<PathBuf>,
    pub annotations_path: Option<PathBuf>,
    pub category: String,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    records: Vec<ManifestRecord>,
    by_id: HashMap<String, usize>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| Path::new("."));
        // absolute base keeps re-emitted manifests valid from any out-dir
        let base = std::fs::canonicalize(base)
            .with_context(|| format!("resolving manifest directory {}", base.display()))?;
        let mut records = Vec::new();
        let mut by_id = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 7 {
                bail!("manifest line {lineno}: expected 7 tab-separated fields, got {}", fields.len());
            }
            let resolve = |p: &str| -> PathBuf {
                let pb = PathBuf::from(p);
                if pb.is_absolute() {
                    pb
                } else {
                    base.join(pb)
                }
            };
            let opt = |p: &str| -> Option<PathBuf> {
                if p == "-" {
                    None
                } else {
                    Some(resolve(p))
                }
            };
            let mut grids = BTreeMap::new();
            if fields[2] != "-" {
                for pair in fields[2].split(';') {
                    let (layer, p) = pair
                        .split_once('=')
                        .ok_or_else(|| anyhow!("manifest line {lineno}: bad grids field {pair:?}"))?;
                    grids.insert(layer.to_string(), resolve(p));
                }
            }
            let record = ManifestRecord {
                image_id: fields[0].to_string(),
                image_path: resolve(fields[1]),
                grids,
                global_path: opt(fields[3]),
                annotations_path: opt(fields[4]),
                category: fields[5].to_string(),
                split: fields[6].parse()?,
            };
            if by_id.insert(record.image_id.clone(), records.len()).is_some() {
                bail!("manifest line {lineno}: duplicate image id {:?}", record.image_id);
            }
            records.push(record);
        }
        if records.is_empty() {
            bail!("manifest {} has no records", path.display());
        }

        // referenced files must exist at load time
        for r in &records {
            let mut paths: Vec<&PathBuf> = vec![&r.image_path];
            paths.extend(r.grids.values());
            paths.extend(r.global_path.iter());
            paths.extend(r.annotations_path.iter());
            for p in paths {
                if !p.exists() {
                    bail!("manifest record {:?}: missing file {}", r.image_id, p.display());
                }
            }
        }
        Ok(Manifest { records, by_id })
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Result<&ManifestRecord> {
        self.by_id
            .get(id)
            .map(|&i| &self.records[i])
            .ok_or_else(|| anyhow!("image id {id:?} not in manifest"))
    }

    pub fn grid_path(&self, id: &str, layer: &str) -> Result<&PathBuf> {
        let r = self.get(id)?;
        r.grids
            .get(layer)
            .ok_or_else(|| anyhow!("image {id:?} has no grid for layer {layer:?}"))
    }

    /// Loads and merges every referenced annotation file, indexed by
    /// image id. Files are read once even when shared between records.
    pub fn load_annotations(&self) -> Result<HashMap<String, KeypointSet>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = HashMap::new();
        for r in &self.records {
            let Some(path) = &r.annotations_path else {
                continue;
            };
            if !seen.insert(path.clone()) {
                continue;
            }
            let sets = read_annotations(path)
                .with_context(|| format!("reading annotations {}", path.display()))?;
            for set in sets {
                out.insert(set.image_id.clone(), set);
            }
        }
        Ok(out)
    }

    /// Records of one category and split, in manifest order.
    pub fn select(&self, category: Option<&str>, split: Option<Split>) -> Vec<&ManifestRecord> {
        self.records
            .iter()
            .filter(|r| category.is_none_or(|c| r.category == c))
            .filter(|r| split.is_none_or(|s| r.split == s))
            .collect()
    }
}

/// Serializes records back to the manifest text format.
pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        let grids = if r.grids.is_empty() {
            "-".to_string()
        } else {
            r.grids
                .iter()
                .map(|(layer, p)| format!("{layer}={}", p.display()))
                .collect::<Vec<_>>()
                .join(";")
        };
        let opt = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "-".to_string())
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.image_id,
            r.image_path.display(),
            grids,
            opt(&r.global_path),
            opt(&r.annotations_path),
            r.category,
            r.split
        ));
    }
    crate::util::write_atomic(path, out.as_bytes())
}
