//! Episode fan-out over a rayon pool; results come back in episode order.

use rayon::prelude::*;
use sinkclust_core::episodes::EpisodeSampler;
use sinkclust_core::metrics::{eval_episode, ClusterConfig, Embedder, EpisodeResult, Task};

use crate::error::{Error, Result};

/// Builds a pool of `jobs` threads; `None` or 0 uses one per core.
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

/// Evaluates episodes `0..episodes` of the stream keyed by `seed`.
#[allow(clippy::too_many_arguments)]
pub fn eval_episodes(
    pool: &rayon::ThreadPool,
    sampler: &EpisodeSampler<'_>,
    seed: u64,
    episodes: u64,
    embedder: &dyn Embedder,
    task: Task,
    cluster: &ClusterConfig,
    temperature: f64,
) -> Result<Vec<EpisodeResult>> {
    pool.install(|| {
        (0..episodes)
            .into_par_iter()
            .map(|i| eval_episode(&sampler.sample(seed, i), i, embedder, task, cluster, temperature))
            .collect::<sinkclust_core::Result<Vec<_>>>()
    })
    .map_err(Error::from)
}
