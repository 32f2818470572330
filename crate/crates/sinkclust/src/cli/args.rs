//! Flag value types shared by several subcommands.

use std::str::FromStr;

use serde::Serialize;
use sinkclust_core::episodes::{Attribute, ConsistencyMode, LabeledDataset};

use crate::error::{Error, Result};
use crate::io::Sidecar;

/// `CARDxSIGNAL`, e.g. `5x3`.
pub fn parse_attribute(s: &str) -> std::result::Result<Attribute, String> {
    let (c, sig) = s.split_once(['x', 'X']).ok_or_else(|| format!("{s:?} is not CARDxSIGNAL"))?;
    let card = c.trim().parse().map_err(|_| format!("bad cardinality in {s:?}"))?;
    let signal = sig.trim().parse().map_err(|_| format!("bad signal in {s:?}"))?;
    Ok(Attribute::new(card, signal))
}

/// `consistent:A`, `mixed` (uniform) or `mixed:p0,p1,...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyArg {
    Consistent(usize),
    UniformMixed,
    Mixed(Vec<f64>),
}

impl FromStr for ConsistencyArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        match (kind, rest) {
            ("consistent", Some(a)) => a.parse().map(Self::Consistent).map_err(|_| format!("bad attribute index {a:?}")),
            ("consistent", None) => Ok(Self::Consistent(0)),
            ("mixed", None) => Ok(Self::UniformMixed),
            ("mixed", Some(ps)) => ps
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad probability {p:?}")))
                .collect::<std::result::Result<_, _>>()
                .map(Self::Mixed),
            _ => Err(format!("{s:?}: expected consistent:A, mixed or mixed:p0,p1,...")),
        }
    }
}

impl ConsistencyArg {
    pub fn resolve(&self, attributes: usize) -> ConsistencyMode {
        match self {
            Self::Consistent(a) => ConsistencyMode::Consistent { attribute: *a },
            Self::UniformMixed => ConsistencyMode::uniform_mixed(attributes),
            Self::Mixed(p) => ConsistencyMode::Mixed { probabilities: p.clone() },
        }
    }
}

/// Episode semantics: the flag, else the sidecar's mode, else the file labels.
pub fn episode_mode(
    flag: Option<&ConsistencyArg>,
    dataset: &LabeledDataset,
    sidecar: Option<&Sidecar>,
) -> Result<Option<ConsistencyMode>> {
    match (flag, &dataset.attributes) {
        (Some(c), Some(attrs)) => Ok(Some(c.resolve(attrs.attribute_count()))),
        (Some(_), None) => Err(Error::Usage("--consistency needs a dataset with an attribute sidecar".into())),
        (None, _) => Ok(sidecar.map(|s| s.consistency().clone())),
    }
}

pub fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("--{name} must be > 0, got {v}")))
    }
}
