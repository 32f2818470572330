use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use sinkclust_core::episodes::{EpisodeSampler, EpisodeShape, ShapeRange};
use sinkclust_core::metrics::{
    aggregate, cscc_from_summaries, Embedder, Identity, QueryAssignment, Task, SUPERVISED_ACCURACY,
    UNSUPERVISED_ACCURACY,
};
use sinkclust_core::trainer::fingerprint_of;

use super::args::{episode_mode, positive, ConsistencyArg};
use super::cluster::MethodArgs;
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::io::{load_dataset, write_json};
use crate::parallel::{eval_episodes, pool};
use crate::report::Envelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskArg {
    /// Few-shot clustering of the support set.
    Fsc,
    /// Unsupervised few-shot classification.
    Ufsc,
    /// Prototype classification with support labels.
    Supervised,
    /// All three on the same episodes.
    All,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Fsc => Task::Fsc,
            TaskArg::Ufsc => Task::Ufsc,
            TaskArg::Supervised => Task::Supervised,
            TaskArg::All => Task::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryAssignmentArg {
    NearestCentroid,
    Sinkhorn,
}

/// Episode shape flags.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ShapeArgs {
    #[arg(long, default_value_t = 5)]
    pub way: usize,
    #[arg(long, default_value_t = 5)]
    pub shots: usize,
    /// Query points per class.
    #[arg(long, default_value_t = 15)]
    pub query: usize,
}

impl ShapeArgs {
    pub fn shape(&self) -> EpisodeShape {
        EpisodeShape::new(self.way, self.shots, self.query)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub task: TaskArg,
    #[arg(long, default_value_t = 1000)]
    pub episodes: u64,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Draw each episode's way uniformly from --way..=--way-max.
    #[arg(long)]
    pub way_max: Option<usize>,
    /// Draw each episode's shot uniformly from --shots..=--shots-max.
    #[arg(long)]
    pub shots_max: Option<usize>,
    /// Embedding checkpoint; the identity is used without one.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Expected layer sizes; checked against the embedding's fingerprint.
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value = "nearest-centroid")]
    pub query_assignment: QueryAssignmentArg,
    /// Softmax temperature of the supervised classifier.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Episode semantics; defaults to the dataset sidecar's mode.
    #[arg(long)]
    pub consistency: Option<ConsistencyArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: one per core). Does not affect results.
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

pub(crate) fn load_embedder(model: Option<&PathBuf>, dim: usize) -> Result<Box<dyn Embedder>> {
    Ok(match model {
        Some(p) => {
            let ck = Checkpoint::load(p)?;
            if !ck.header.is_final {
                log::warn!("{} is a non-final checkpoint ({} episodes)", p.display(), ck.header.episodes_done);
            }
            Box::new(ck.model) as Box<dyn Embedder>
        }
        None => Box::new(Identity { dim }),
    })
}

pub(crate) fn check_layers(layers: Option<&Vec<usize>>, embedder: &dyn Embedder) -> Result<()> {
    if let Some(sizes) = layers {
        let want = fingerprint_of(sizes);
        if want != embedder.fingerprint() {
            return Err(sinkclust_core::Error::Argument(format!(
                "architecture fingerprint mismatch: --layers {sizes:?} gives {want}, the embedding has {}",
                embedder.fingerprint()
            ))
            .into());
        }
    }
    Ok(())
}

pub fn run(a: &EvalArgs) -> Result<()> {
    let mut cluster = a.method.cluster_config()?;
    positive("temperature", a.temperature)?;
    cluster.query_assignment = match a.query_assignment {
        QueryAssignmentArg::NearestCentroid => QueryAssignment::NearestCentroid,
        QueryAssignmentArg::Sinkhorn => QueryAssignment::SinkhornConditionals { gamma: a.method.gamma },
    };
    if a.episodes == 0 {
        return Err(Error::Usage("--episodes must be >= 1".into()));
    }
    let loaded = load_dataset(&a.data)?;
    let ds = &loaded.dataset;
    let embedder = load_embedder(a.model.as_ref(), ds.dim())?;
    check_layers(a.layers.as_ref(), embedder.as_ref())?;
    let mode = episode_mode(a.consistency.as_ref(), ds, loaded.sidecar.as_ref())?;
    let range = ShapeRange {
        way: (a.shape.way, a.way_max.unwrap_or(a.shape.way)),
        shot: (a.shape.shots, a.shots_max.unwrap_or(a.shape.shots)),
        query: a.shape.query,
    };
    let sampler = EpisodeSampler::with_range(ds, range, mode.as_ref())?;

    let results = eval_episodes(
        &pool(a.jobs)?,
        &sampler,
        a.seed,
        a.episodes,
        embedder.as_ref(),
        a.task.into(),
        &cluster,
        a.temperature,
    )?;
    let mut report = aggregate(&results)?.with_fingerprint(embedder.fingerprint());
    if let (Some(u), Some(s)) = (report.metric(UNSUPERVISED_ACCURACY), report.metric(SUPERVISED_ACCURACY)) {
        report.cscc = cscc_from_summaries(u, s, report.way).ok();
    }
    if report.non_converged_episodes > 0 {
        log::warn!("{} episodes hit the clustering iteration cap", report.non_converged_episodes);
    }

    let config = serde_json::json!({
        "args": a,
        "effective": {
            "cluster": cluster,
            "episode_mode": mode,
            "shape": range,
            "temperature": a.temperature,
        },
    });
    write_json(&a.output, &Envelope::new("eval", &config, &report))?;
    for (name, m) in &report.metrics {
        println!("{name} {:.4} ± {:.4} (n={})", m.mean, m.ci95, m.n);
    }
    Ok(())
}
