//! Few-shot accuracies, cluster/class matching, evaluation pipelines,
//! aggregation with 95% intervals and the class semantics consistency ratio.

mod eval;
mod matching;
mod report;

pub use eval::{
    cluster_points, cluster_support, eval_clustering_tasks, eval_episode, eval_few_shot_clustering, eval_supervised_fsc,
    eval_unsupervised_fsc, ClusterConfig, ClusterMethod, Embedder, Identity, QueryAssignment, SupportClustering, Task,
};
pub use matching::{accuracy, min_cost_assignment, optimal_match, MatchingResult};
pub use report::{
    aggregate, cscc, cscc_from_summaries, Cscc, EpisodeMeta, EpisodeResult, EvalReport, MetricSummary,
    CLUSTERING_ACCURACY, SUPERVISED_ACCURACY, UNSUPERVISED_ACCURACY, Z95,
};
