use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use sinkclust_core::metrics::{cscc, EvalReport};

use crate::error::{Error, Result};
use crate::io::{read_json, write_json};
use crate::report::Envelope;

#[derive(Debug, Clone, Args, Serialize)]
pub struct CsccArgs {
    /// Report holding the unsupervised accuracy.
    #[arg(long)]
    pub unsup: PathBuf,
    /// Report holding the supervised accuracy.
    #[arg(long)]
    pub sup: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// An `eval` envelope or a bare report.
pub fn read_eval_report(path: &Path) -> Result<EvalReport> {
    let v: serde_json::Value = read_json(path)?;
    let body = match v.get("result") {
        Some(r) if v.get("tool").is_some() => r.clone(),
        _ => v,
    };
    serde_json::from_value(body).map_err(|e| Error::parse(path, format!("not an eval report: {e}")))
}

pub fn run(a: &CsccArgs) -> Result<()> {
    let unsup = read_eval_report(&a.unsup)?;
    let sup = read_eval_report(&a.sup)?;
    let c = cscc(&unsup, &sup)?;
    if c.below_chance {
        log::warn!("supervised accuracy {:.4} is at or below chance; the ratio is not meaningful", c.supervised_mean);
    }
    let config = serde_json::json!({ "args": a, "fingerprint": unsup.fingerprint });
    write_json(&a.output, &Envelope::new("cscc", &config, &c))?;
    println!("cscc {:.4} ± {:.4}", c.value, c.ci95);
    Ok(())
}
