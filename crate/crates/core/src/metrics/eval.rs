//! Episode-level evaluation of the three few-shot tasks.
//!
//! Clustering and unsupervised classification both cluster the embedded
//! support set without labels; support labels are only consulted to find the
//! cluster-to-class permutation. Supervised classification uses the labeled
//! support set to build prototypes.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::matching::{accuracy, optimal_match, MatchingResult};
use super::report::{EpisodeMeta, EpisodeResult};
use crate::assign::{hard_assign, nearest_centroid, prototypes, sinkhorn_conditionals, softmax_conditionals};
use crate::clustering::{lloyd_kmeans, sinkhorn_kmeans, ClusteringResult, InitStrategy, LloydOptions, SinkhornKMeansOptions};
use crate::episodes::Episode;
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::ot::{build_cost_matrix, sinkhorn, Marginals};

/// Maps raw features to embeddings.
pub trait Embedder: Sync {
    fn embed(&self, x: &Matrix) -> Result<Matrix>;

    /// Architecture fingerprint; equal fingerprints mean identical layer sizes.
    fn fingerprint(&self) -> String;
}

/// The identity map on `dim`-dimensional features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity {
    pub dim: usize,
}

impl Embedder for Identity {
    fn embed(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim {
            bail!(Shape, "identity embedding expects {} features, got {}", self.dim, x.cols());
        }
        Ok(x.clone())
    }

    fn fingerprint(&self) -> String {
        crate::trainer::fingerprint_of(&[self.dim])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ClusterMethod {
    Sinkhorn { gamma: f64, options: SinkhornKMeansOptions },
    Lloyd { options: LloydOptions },
}

/// How query points are attached to support centroids.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QueryAssignment {
    #[default]
    NearestCentroid,
    /// Balanced Sinkhorn between the query set and the fixed centroids, then row argmax.
    SinkhornConditionals { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub method: ClusterMethod,
    /// Standard deviation of the around-zero initialization for Sinkhorn K-Means.
    pub init_noise: f64,
    pub query_assignment: QueryAssignment,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            method: ClusterMethod::Sinkhorn { gamma: 1.0, options: SinkhornKMeansOptions::default() },
            init_noise: 1e-3,
            query_assignment: QueryAssignment::NearestCentroid,
        }
    }
}

impl ClusterConfig {
    pub fn lloyd(restarts: usize) -> Self {
        Self { method: ClusterMethod::Lloyd { options: LloydOptions { restarts, ..Default::default() } }, ..Default::default() }
    }
}

/// Clusters `points` into `k` balanced groups with the configured method.
pub fn cluster_points(points: &Matrix, k: usize, cfg: &ClusterConfig, seed: u64) -> Result<ClusteringResult> {
    match &cfg.method {
        ClusterMethod::Sinkhorn { gamma, options } => {
            let weights = alloc::vec![1.0 / k as f64; k];
            sinkhorn_kmeans(points, k, &weights, *gamma, &InitStrategy::zero_noise(cfg.init_noise, seed), options)
        }
        ClusterMethod::Lloyd { options } => lloyd_kmeans(points, k, &InitStrategy::kmeans_pp(seed), options),
    }
}

/// Unsupervised view of an episode: the embedded support set, its clustering
/// and the support-set matching.
#[derive(Debug, Clone)]
pub struct SupportClustering {
    pub support: Matrix,
    pub clustering: ClusteringResult,
    pub matching: MatchingResult,
}

/// Embeds and clusters the support set. Only the final matching reads `support_y`.
pub fn cluster_support(episode: &Episode, embedder: &dyn Embedder, cfg: &ClusterConfig) -> Result<SupportClustering> {
    let support = embedder.embed(&episode.support_x)?;
    let clustering = cluster_points(&support, episode.way(), cfg, episode.seed)?;
    let matching = optimal_match(&clustering.hard_labels, &episode.support_y, episode.way())?;
    Ok(SupportClustering { support, clustering, matching })
}

fn meta(episode: &Episode, index: u64) -> EpisodeMeta {
    EpisodeMeta {
        index,
        way: episode.shape.way,
        shot: episode.shape.shot,
        seed: episode.seed,
        semantic_attribute: episode.semantic_attribute,
    }
}

fn query_clusters(query: &Matrix, centroids: &Matrix, mode: QueryAssignment) -> Result<Vec<usize>> {
    match mode {
        QueryAssignment::NearestCentroid => nearest_centroid(query, centroids),
        QueryAssignment::SinkhornConditionals { gamma } => {
            let cost = build_cost_matrix(query, centroids)?;
            let plan = sinkhorn(&cost, &Marginals::uniform(query.rows(), centroids.rows())?, gamma, &Default::default())?;
            Ok(hard_assign(&sinkhorn_conditionals(&plan)?))
        }
    }
}

pub fn eval_few_shot_clustering(episode: &Episode, embedder: &dyn Embedder, cfg: &ClusterConfig) -> Result<EpisodeResult> {
    let sc = cluster_support(episode, embedder, cfg)?;
    Ok(EpisodeResult {
        clustering_accuracy: Some(sc.matching.matched_accuracy),
        converged: sc.clustering.converged,
        ..EpisodeResult::new(meta(episode, 0))
    })
}

pub fn eval_unsupervised_fsc(episode: &Episode, embedder: &dyn Embedder, cfg: &ClusterConfig) -> Result<EpisodeResult> {
    eval_clustering_tasks(episode, embedder, cfg)
        .map(|r| EpisodeResult { clustering_accuracy: None, ..r })
}

/// Clustering and unsupervised accuracies from a single support clustering.
pub fn eval_clustering_tasks(episode: &Episode, embedder: &dyn Embedder, cfg: &ClusterConfig) -> Result<EpisodeResult> {
    let sc = cluster_support(episode, embedder, cfg)?;
    let query = embedder.embed(&episode.query_x)?;
    let unsupervised = if query.rows() == 0 {
        None
    } else {
        let clusters = query_clusters(&query, &sc.clustering.centroids, cfg.query_assignment)?;
        Some(accuracy(&sc.matching.relabel(&clusters), &episode.query_y))
    };
    Ok(EpisodeResult {
        clustering_accuracy: Some(sc.matching.matched_accuracy),
        unsupervised_accuracy: unsupervised,
        converged: sc.clustering.converged,
        ..EpisodeResult::new(meta(episode, 0))
    })
}

/// Prototype classifier: softmax conditionals against class means, argmax.
pub fn eval_supervised_fsc(episode: &Episode, embedder: &dyn Embedder, temperature: f64) -> Result<EpisodeResult> {
    let support = embedder.embed(&episode.support_x)?;
    let query = embedder.embed(&episode.query_x)?;
    let protos = prototypes(&support, &episode.support_y, episode.way())?;
    let supervised = if query.rows() == 0 {
        None
    } else {
        let pred = hard_assign(&softmax_conditionals(&query, &protos, temperature)?);
        Some(accuracy(&pred, &episode.query_y))
    };
    Ok(EpisodeResult { supervised_accuracy: supervised, ..EpisodeResult::new(meta(episode, 0)) })
}

/// Which accuracies to compute per episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Few-shot clustering.
    Fsc,
    /// Unsupervised few-shot classification.
    Ufsc,
    Supervised,
    /// All three on the same episode.
    All,
}

/// Runs `task` on one episode and stamps the episode index into the result.
pub fn eval_episode(
    episode: &Episode,
    index: u64,
    embedder: &dyn Embedder,
    task: Task,
    cluster: &ClusterConfig,
    temperature: f64,
) -> Result<EpisodeResult> {
    let mut result = match task {
        Task::Fsc => eval_few_shot_clustering(episode, embedder, cluster)?,
        Task::Ufsc => eval_unsupervised_fsc(episode, embedder, cluster)?,
        Task::Supervised => eval_supervised_fsc(episode, embedder, temperature)?,
        Task::All => eval_clustering_tasks(episode, embedder, cluster)?
            .merge(&eval_supervised_fsc(episode, embedder, temperature)?),
    };
    result.meta.index = index;
    Ok(result)
}
