use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use sinkclust_core::clustering::{ClusterWarning, LabelMode, LloydOptions, SinkhornKMeansOptions};
use sinkclust_core::metrics::{cluster_points, optimal_match, ClusterConfig, ClusterMethod};

use super::args::positive;
use crate::checkpoint::Checkpoint;
use crate::error::Result;
use crate::io::{load_dataset, write_bytes, write_json, write_matrix};
use crate::report::Envelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sinkhorn,
    Lloyd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelModeArg {
    NearestCentroid,
    PlanArgmax,
}

/// Clustering flags shared with `eval` and `bench`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "sinkhorn")]
    pub method: Method,
    /// Entropic regularization of Sinkhorn K-Means.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// K-Means++ restarts for Lloyd; the lowest objective is kept.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Std of the around-zero centroid initialization.
    #[arg(long, default_value_t = 1e-3)]
    pub init_noise: f64,
    #[arg(long, value_enum, default_value = "nearest-centroid")]
    pub label_mode: LabelModeArg,
}

impl MethodArgs {
    pub fn cluster_config(&self) -> Result<ClusterConfig> {
        positive("gamma", self.gamma)?;
        positive("init-noise", self.init_noise)?;
        if self.restarts == 0 {
            return Err(crate::Error::Usage("--restarts must be >= 1".into()));
        }
        let label_mode = match self.label_mode {
            LabelModeArg::NearestCentroid => LabelMode::NearestCentroid,
            LabelModeArg::PlanArgmax => LabelMode::PlanArgmax,
        };
        let method = match self.method {
            Method::Sinkhorn => ClusterMethod::Sinkhorn {
                gamma: self.gamma,
                options: SinkhornKMeansOptions { label_mode, ..Default::default() },
            },
            Method::Lloyd => ClusterMethod::Lloyd { options: LloydOptions { restarts: self.restarts, ..Default::default() } },
        };
        Ok(ClusterConfig { method, init_noise: self.init_noise, ..Default::default() })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    /// Dataset (`.emb` or `.csv`).
    #[arg(long)]
    pub data: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Embed the data with this checkpoint before clustering.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report; centroids and labels go to `<stem>.centroids.csv` and `<stem>.labels.csv`.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Serialize)]
struct ClusterReport {
    centroids_file: String,
    labels_file: String,
    n: usize,
    k: usize,
    objective: f64,
    outer_iterations: usize,
    converged: bool,
    cluster_sizes: Vec<usize>,
    clustering_accuracy: Option<f64>,
    warnings: Vec<ClusterWarning>,
}

fn sibling(report: &Path, suffix: &str) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    report.with_file_name(format!("{stem}.{suffix}"))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn run(a: &ClusterArgs) -> Result<()> {
    let cfg = a.method.cluster_config()?;
    let loaded = load_dataset(&a.data)?;
    let ds = &loaded.dataset;
    let (points, fingerprint) = match &a.model {
        Some(p) => {
            let ck = Checkpoint::load(p)?;
            (ck.model.forward(&ds.features)?, Some(ck.header.fingerprint))
        }
        None => (ds.features.clone(), None),
    };
    let result = cluster_points(&points, a.k, &cfg, a.seed)?;

    let accuracy = match &ds.labels {
        Some(labels) if ds.class_count == a.k => Some(optimal_match(&result.hard_labels, labels, a.k)?.matched_accuracy),
        Some(_) => {
            log::warn!("dataset has {} classes, k = {}; skipping accuracy", ds.class_count, a.k);
            None
        }
        None => None,
    };
    for w in &result.warnings {
        log::debug!("{w:?}");
    }

    let centroids_path = sibling(&a.output, "centroids.csv");
    let labels_path = sibling(&a.output, "labels.csv");
    let cluster_ids: Vec<usize> = (0..a.k).collect();
    write_matrix(&centroids_path, &result.centroids, Some(&cluster_ids))?;
    let mut labels_csv = String::from("row,label\n");
    for (i, l) in result.hard_labels.iter().enumerate() {
        labels_csv.push_str(&format!("{i},{l}\n"));
    }
    write_bytes(&labels_path, labels_csv.as_bytes())?;

    let report = ClusterReport {
        centroids_file: file_name(&centroids_path),
        labels_file: file_name(&labels_path),
        n: points.rows(),
        k: a.k,
        objective: result.objective(),
        outer_iterations: result.outer_iterations,
        converged: result.converged,
        cluster_sizes: result.cluster_sizes(),
        clustering_accuracy: accuracy,
        warnings: result.warnings.clone(),
    };
    let config = serde_json::json!({ "args": a, "effective": cfg, "fingerprint": fingerprint });
    write_json(&a.output, &Envelope::new("cluster", &config, &report))?;
    match accuracy {
        Some(acc) => println!("objective {:.6}  clustering_accuracy {acc:.4}", report.objective),
        None => println!("objective {:.6}", report.objective),
    }
    Ok(())
}
