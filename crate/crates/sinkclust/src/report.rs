//! JSON envelope shared by every command's output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "sinkclust";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical config, hashed like a git object.
    pub run_id: String,
    pub config: serde_json::Value,
    pub result: serde_json::Value,
}

/// `sha256("sinkclust-run <len>\0<config json>")` as lowercase hex.
pub fn run_id(config: &serde_json::Value) -> String {
    let body = serde_json::to_string(config).expect("serializable config");
    let mut h = Sha256::new();
    h.update(format!("sinkclust-run {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Envelope {
    pub fn new<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Self {
        let config = serde_json::to_value(config).expect("serializable config");
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            run_id: run_id(&config),
            config,
            result: serde_json::to_value(result).expect("serializable result"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_is_stable_and_config_sensitive() {
        let a = run_id(&serde_json::json!({"k": 3, "gamma": 1.0}));
        // key order does not matter: objects are sorted maps
        assert_eq!(a, run_id(&serde_json::json!({"gamma": 1.0, "k": 3})));
        assert_ne!(a, run_id(&serde_json::json!({"k": 4, "gamma": 1.0})));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn run_id_of_empty_config() {
        // printf 'sinkclust-run 2\0{}' | sha256sum
        assert_eq!(run_id(&serde_json::json!({})), "c9f3196e9260a27978a8dff9237c79651c11843324a4ec41560bf993b19ba271");
    }
}
