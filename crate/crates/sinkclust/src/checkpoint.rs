//! Model checkpoints.
//!
//! ```text
//! offset  size       field
//! 0       4          magic "SKCP"
//! 4       4          header length H (u32 LE)
//! 8       H          UTF-8 JSON header (see `CheckpointHeader`)
//! 8+H     8*P        parameters, f64 LE, in `EmbeddingModel::params` order
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sinkclust_core::trainer::EmbeddingModel;

use crate::error::{Error, Result};
use crate::io::{read_bytes, write_bytes};

pub const MAGIC: &[u8; 4] = b"SKCP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub sizes: Vec<usize>,
    pub fingerprint: String,
    /// Initialization seed.
    pub seed: u64,
    /// False for a run that stopped early or diverged.
    #[serde(rename = "final")]
    pub is_final: bool,
    pub episodes_done: usize,
    pub param_count: usize,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub model: EmbeddingModel,
}

impl Checkpoint {
    pub fn new(model: EmbeddingModel, seed: u64, is_final: bool, episodes_done: usize, config: serde_json::Value) -> Self {
        let header = CheckpointHeader {
            format_version: FORMAT_VERSION,
            sizes: model.sizes().to_vec(),
            fingerprint: model.fingerprint(),
            seed,
            is_final,
            episodes_done,
            param_count: model.param_count(),
            config,
        };
        Self { header, model }
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("serializable header");
        let mut out = Vec::with_capacity(8 + header.len() + 8 * self.model.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for p in self.model.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err("not a checkpoint (missing \"SKCP\" magic at offset 0)".into());
        }
        let h = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let body = bytes.get(8..8 + h).ok_or_else(|| format!("header length {h} at offset 4 exceeds file size"))?;
        let header: CheckpointHeader =
            serde_json::from_slice(body).map_err(|e| format!("header at offset 8: {e}"))?;
        if header.format_version != FORMAT_VERSION {
            return Err(format!("unsupported checkpoint version {}", header.format_version));
        }
        let blob = &bytes[8 + h..];
        if blob.len() != 8 * header.param_count {
            return Err(format!(
                "parameter blob at offset {} is {} bytes, header declares {} parameters",
                8 + h,
                blob.len(),
                header.param_count
            ));
        }
        let params: Vec<f64> =
            blob.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(format!("non-finite parameter at offset {}", 8 + h + 8 * i));
        }
        let model = EmbeddingModel::from_params(&header.sizes, params).map_err(|e| e.to_string())?;
        if model.fingerprint() != header.fingerprint {
            return Err(format!(
                "stored fingerprint {} does not match layer sizes {:?} ({})",
                header.fingerprint,
                header.sizes,
                model.fingerprint()
            ));
        }
        Ok(Self { header, model })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.encode())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&read_bytes(path)?).map_err(|d| Error::parse(path, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let model = EmbeddingModel::new(&[3, 5, 2], 4).unwrap();
        Checkpoint::new(model, 4, true, 12, serde_json::json!({"lr": 0.001}))
    }

    #[test]
    fn round_trip_is_bitwise() {
        let ck = sample();
        let bytes = ck.encode();
        assert_eq!(&bytes[..4], b"SKCP");
        let back = Checkpoint::decode(&bytes).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.encode(), bytes);
    }

    #[test]
    fn header_says_final() {
        let bytes = sample().encode();
        let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let header: serde_json::Value = serde_json::from_slice(&bytes[8..8 + h]).unwrap();
        assert_eq!(header["final"], true);
        assert_eq!(header["param_count"], 3 * 5 + 5 + 5 * 2 + 2);
    }

    #[test]
    fn corruption_is_reported() {
        let bytes = sample().encode();
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 3]).unwrap_err().contains("parameter blob"));
        assert!(Checkpoint::decode(b"SKCP").is_err());
        let mut bad = bytes.clone();
        bad[0] = b'x';
        assert!(Checkpoint::decode(&bad).unwrap_err().contains("magic"));
        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 8..].copy_from_slice(&f64::INFINITY.to_le_bytes());
        assert!(Checkpoint::decode(&bad).unwrap_err().contains("non-finite"));
    }
}
