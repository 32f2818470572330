use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use sinkclust_core::episodes::EpisodeSampler;
use sinkclust_core::metrics::{cluster_support, ClusterConfig, Embedder, MetricSummary};

use super::args::{episode_mode, ConsistencyArg};
use super::eval::{load_embedder, ShapeArgs};
use crate::error::{Error, Result};
use crate::io::{load_dataset, write_json};
use crate::report::Envelope;

/// Timings are wall-clock and vary between runs; episodes run one at a time.
#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub episodes: u64,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long)]
    pub consistency: Option<ConsistencyArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Serialize)]
struct MethodTiming {
    mean_ms: f64,
    median_ms: f64,
    clustering_accuracy: MetricSummary,
}

fn time_method(
    sampler: &EpisodeSampler<'_>,
    a: &BenchArgs,
    embedder: &dyn Embedder,
    cfg: &ClusterConfig,
) -> Result<MethodTiming> {
    let mut ms = Vec::with_capacity(a.episodes as usize);
    let mut acc = Vec::with_capacity(a.episodes as usize);
    for i in 0..a.episodes {
        let ep = sampler.sample(a.seed, i);
        let t = Instant::now();
        let sc = cluster_support(&ep, embedder, cfg)?;
        ms.push(t.elapsed().as_secs_f64() * 1e3);
        acc.push(sc.matching.matched_accuracy);
    }
    let mean_ms = ms.iter().sum::<f64>() / ms.len() as f64;
    ms.sort_by(f64::total_cmp);
    Ok(MethodTiming { mean_ms, median_ms: ms[ms.len() / 2], clustering_accuracy: MetricSummary::from_values(&acc)? })
}

pub fn run(a: &BenchArgs) -> Result<()> {
    if a.episodes == 0 {
        return Err(Error::Usage("--episodes must be >= 1".into()));
    }
    let sinkhorn_cfg = super::cluster::MethodArgs {
        method: super::cluster::Method::Sinkhorn,
        gamma: a.gamma,
        restarts: a.restarts,
        init_noise: 1e-3,
        label_mode: super::cluster::LabelModeArg::NearestCentroid,
    };
    let lloyd_cfg = super::cluster::MethodArgs { method: super::cluster::Method::Lloyd, ..sinkhorn_cfg.clone() };
    let (sinkhorn_cfg, lloyd_cfg) = (sinkhorn_cfg.cluster_config()?, lloyd_cfg.cluster_config()?);

    let loaded = load_dataset(&a.data)?;
    let ds = &loaded.dataset;
    let embedder = load_embedder(a.model.as_ref(), ds.dim())?;
    let mode = episode_mode(a.consistency.as_ref(), ds, loaded.sidecar.as_ref())?;
    let sampler = EpisodeSampler::new(ds, a.shape.shape(), mode.as_ref())?;

    let sinkhorn = time_method(&sampler, a, embedder.as_ref(), &sinkhorn_cfg)?;
    let lloyd = time_method(&sampler, a, embedder.as_ref(), &lloyd_cfg)?;
    println!(
        "sinkhorn {:.3} ms/episode (acc {:.4})  lloyd x{} {:.3} ms/episode (acc {:.4})",
        sinkhorn.mean_ms, sinkhorn.clustering_accuracy.mean, a.restarts, lloyd.mean_ms, lloyd.clustering_accuracy.mean
    );
    let result = serde_json::json!({
        "episodes": a.episodes,
        "sinkhorn": sinkhorn,
        "lloyd": lloyd,
        "lloyd_over_sinkhorn_time": lloyd.mean_ms / sinkhorn.mean_ms,
    });
    let config = serde_json::json!({ "args": a, "sinkhorn": sinkhorn_cfg, "lloyd": lloyd_cfg });
    write_json(&a.output, &Envelope::new("bench", &config, &result))
}
