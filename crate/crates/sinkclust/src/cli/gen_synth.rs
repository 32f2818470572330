use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sinkclust_core::episodes::{gen_attribute_dataset, Attribute, AttributeSpec, ConsistencyMode};

use super::args::{parse_attribute, ConsistencyArg};
use crate::error::{Error, Result};
use crate::io::{sidecar_path, write_json, write_matrix, Sidecar};

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenSynthArgs {
    /// Attributes as CARDxSIGNAL, comma separated (e.g. 5x3,5x3,5x3).
    #[arg(long, value_delimiter = ',', value_parser = parse_attribute, required = true)]
    pub attrs: Vec<Attribute>,
    #[arg(long, default_value_t = 1.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 1)]
    pub dim_per_value: usize,
    #[arg(long, default_value_t = 1)]
    pub samples_per_combination: usize,
    /// consistent:A, mixed (uniform) or mixed:p0,p1,...
    #[arg(long, default_value = "consistent:0")]
    pub consistency: ConsistencyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output dataset; `.csv` writes CSV, anything else `.emb`.
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Attribute written as the file's labels: the consistent one, else the most likely.
fn label_attribute(mode: &ConsistencyMode) -> usize {
    match mode {
        ConsistencyMode::Consistent { attribute } => *attribute,
        ConsistencyMode::Mixed { probabilities } => {
            let max = probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            probabilities.iter().position(|&p| p == max).unwrap_or(0)
        }
    }
}

pub fn run(a: &GenSynthArgs) -> Result<()> {
    let spec = AttributeSpec {
        attributes: a.attrs.clone(),
        noise_std: a.noise_std,
        dim_per_value: a.dim_per_value,
        samples_per_combination: a.samples_per_combination,
        consistency: a.consistency.resolve(a.attrs.len()),
    };
    let ds = gen_attribute_dataset(&spec, a.seed)?;
    let table = ds.attributes.clone().ok_or_else(|| Error::Usage("generator returned no attribute table".into()))?;
    let label_attribute = label_attribute(&spec.consistency);
    let labels = table.labels_for(label_attribute);
    write_matrix(&a.output, &ds.features, Some(&labels))?;
    let sidecar = Sidecar {
        generator: "attribute-grid".into(),
        version: crate::report::VERSION.into(),
        seed: a.seed,
        rows: ds.len(),
        dim: ds.dim(),
        spec,
        label_attribute,
        attributes: table,
    };
    write_json(&sidecar_path(&a.output), &sidecar)?;
    log::info!("wrote {} ({} rows, dim {})", a.output.display(), sidecar.rows, sidecar.dim);
    Ok(())
}
