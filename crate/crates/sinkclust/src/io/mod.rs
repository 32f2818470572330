//! Dataset files: `.emb` binary or CSV, plus an optional JSON sidecar
//! `<path>.json` carrying the latent attribute table of synthetic data.

pub mod csv;
pub mod emb;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sinkclust_core::episodes::{AttributeSpec, AttributeTable, ConsistencyMode, LabeledDataset};
use sinkclust_core::Matrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Emb,
    Csv,
}

impl Format {
    /// `.csv` means CSV; anything else is `.emb`.
    pub fn of(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Emb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generator: String,
    pub version: String,
    pub seed: u64,
    pub spec: AttributeSpec,
    pub rows: usize,
    pub dim: usize,
    /// Attribute whose values were written as the file's labels.
    pub label_attribute: usize,
    pub attributes: AttributeTable,
}

impl Sidecar {
    pub fn consistency(&self) -> &ConsistencyMode {
        &self.spec.consistency
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Reads a matrix and its labels, if any.
pub fn read_matrix(path: &Path) -> Result<(Matrix, Option<Vec<usize>>)> {
    let bytes = read_bytes(path)?;
    match Format::of(path) {
        Format::Emb => emb::decode(&bytes).map_err(|d| Error::parse(path, d)),
        Format::Csv => csv::decode(&bytes).map(|(m, l)| (m, Some(l))).map_err(|d| Error::parse(path, d)),
    }
}

pub fn write_matrix(path: &Path, features: &Matrix, labels: Option<&[usize]>) -> Result<()> {
    let bytes = match Format::of(path) {
        Format::Emb => emb::encode(features, labels),
        Format::Csv => {
            let fallback;
            let labels = match labels {
                Some(l) => l,
                None => {
                    fallback = vec![0; features.rows()];
                    &fallback
                }
            };
            csv::encode(features, labels)
        }
    }
    .map_err(Error::Usage)?;
    write_bytes(path, &bytes)
}

/// A dataset file with its sidecar, when one sits next to it.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: LabeledDataset,
    pub sidecar: Option<Sidecar>,
}

pub fn load_dataset(path: &Path) -> Result<LoadedDataset> {
    let (features, labels) = read_matrix(path)?;
    let mut dataset = match labels {
        Some(l) => LabeledDataset::labeled(features, l)?,
        None => LabeledDataset::unlabeled(features)?,
    };
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        let s: Sidecar = read_json(&side)?;
        if s.rows != dataset.len() || s.dim != dataset.dim() {
            return Err(Error::parse(
                &side,
                format!("sidecar describes {}x{}, data is {}x{}", s.rows, s.dim, dataset.len(), dataset.dim()),
            ));
        }
        dataset.attributes = Some(s.attributes.clone());
        dataset.validate()?;
        Some(s)
    } else {
        None
    };
    log::debug!("loaded {}: {} rows, dim {}", path.display(), dataset.len(), dataset.dim());
    Ok(LoadedDataset { dataset, sidecar })
}
