use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use sinkclust_core::episodes::{ConsistencyMode, LabeledDataset};
use sinkclust_core::trainer::{
    train, EmbeddingModel, EpochSummary, LossConfig, OptimizerConfig, TrainConditional, TrainConfig, TrainObserver,
    TrainStatus,
};

use super::args::{episode_mode, ConsistencyArg};
use super::eval::ShapeArgs;
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::io::{load_dataset, write_json};
use crate::report::Envelope;

/// Hidden and output sizes appended to the data dimension when `--layers` is absent.
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionalArg {
    Softmax,
    Sinkhorn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Class conditionals of the surrogate loss.
    #[arg(long, value_enum, default_value = "sinkhorn")]
    pub conditionals: ConditionalArg,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Unrolled Sinkhorn iterations.
    #[arg(long, default_value_t = 20)]
    pub unroll: usize,
    /// Weight of the center loss.
    #[arg(long, default_value_t = 1.0)]
    pub center_weight: f64,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// SGD momentum.
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 100)]
    pub episodes_per_epoch: usize,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Seed of the training episode stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the parameter initialization.
    #[arg(long, default_value_t = 0)]
    pub init_seed: u64,
    /// Layer sizes including the input dimension [default: DIM,64,16].
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    /// Episode semantics; defaults to the dataset sidecar's mode.
    #[arg(long)]
    pub consistency: Option<ConsistencyArg>,
    /// Stop after this many episodes and write a non-final checkpoint.
    #[arg(long)]
    pub max_episodes: Option<usize>,
    /// Paired runs over one flag, e.g. center-weight=0,1 (same seeds).
    #[arg(long)]
    pub sweep: Option<String>,
    /// Checkpoint path; the loss curve goes to `<stem>.curve.json`.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub const SWEEP_KEYS: [&str; 10] = [
    "center-weight",
    "lr",
    "gamma",
    "temperature",
    "unroll",
    "conditionals",
    "optimizer",
    "momentum",
    "init-seed",
    "seed",
];

fn bad(key: &str, v: &str) -> Error {
    Error::Usage(format!("--sweep {key}: bad value {v:?}"))
}

impl TrainArgs {
    fn with_override(&self, key: &str, v: &str) -> Result<Self> {
        let mut a = self.clone();
        let f = || v.parse::<f64>().map_err(|_| bad(key, v));
        let u = || v.parse::<u64>().map_err(|_| bad(key, v));
        match key {
            "center-weight" => a.center_weight = f()?,
            "lr" => a.lr = f()?,
            "gamma" => a.gamma = f()?,
            "temperature" => a.temperature = f()?,
            "momentum" => a.momentum = f()?,
            "unroll" => a.unroll = u()? as usize,
            "init-seed" => a.init_seed = u()?,
            "seed" => a.seed = u()?,
            "conditionals" => a.conditionals = ConditionalArg::from_str(v, true).map_err(|_| bad(key, v))?,
            "optimizer" => a.optimizer = OptimizerArg::from_str(v, true).map_err(|_| bad(key, v))?,
            _ => return Err(Error::Usage(format!("--sweep key {key:?} is not one of {}", SWEEP_KEYS.join(", ")))),
        }
        a.sweep = None;
        Ok(a)
    }

    pub fn train_config(&self) -> TrainConfig {
        let conditional = match self.conditionals {
            ConditionalArg::Softmax => TrainConditional::Softmax { temperature: self.temperature },
            ConditionalArg::Sinkhorn => TrainConditional::Sinkhorn { gamma: self.gamma, unroll_iters: self.unroll },
        };
        let optimizer = match self.optimizer {
            OptimizerArg::Adam => OptimizerConfig::default().with_lr(self.lr),
            OptimizerArg::Sgd => OptimizerConfig::Sgd { lr: self.lr, momentum: self.momentum },
        };
        TrainConfig {
            loss: LossConfig { conditional, center_weight: self.center_weight, ..Default::default() },
            optimizer,
            episodes_per_epoch: self.episodes_per_epoch,
            epochs: self.epochs,
            shape: self.shape.shape(),
            seed: self.seed,
        }
    }
}

struct Progress {
    max_episodes: Option<usize>,
}

impl TrainObserver for Progress {
    fn on_epoch(&mut self, s: &EpochSummary, _: &EmbeddingModel) {
        log::info!(
            "epoch {}: loss {:.5} (surrogate {:.5}, center {:.5})",
            s.epoch,
            s.mean.total,
            s.mean.surrogate,
            s.mean.center
        );
    }

    fn should_stop(&mut self, done: usize) -> bool {
        self.max_episodes.is_some_and(|m| done >= m)
    }
}

#[derive(Debug, Serialize)]
struct CurveReport {
    checkpoint: String,
    fingerprint: String,
    status: &'static str,
    #[serde(rename = "final")]
    is_final: bool,
    episodes_done: usize,
    error: Option<String>,
    curve: Vec<EpochSummary>,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// One training run; returns the curve report written next to the checkpoint.
fn run_one(
    a: &TrainArgs,
    ds: &LabeledDataset,
    mode: Option<&ConsistencyMode>,
    sizes: &[usize],
    checkpoint_path: &Path,
) -> Result<(CurveReport, Option<Error>)> {
    let cfg = a.train_config();
    cfg.validate()?;
    let init = EmbeddingModel::new(sizes, a.init_seed)?;
    let run = train(ds, mode, init, &cfg, &mut Progress { max_episodes: a.max_episodes })?;
    let (status, error) = match &run.status {
        TrainStatus::Completed => ("completed", None),
        TrainStatus::Stopped => ("stopped", None),
        TrainStatus::Diverged { episode, error } => {
            log::error!("diverged at episode {episode}: {error}");
            ("diverged", Some(error.clone()))
        }
    };
    let config = serde_json::json!({
        "args": a,
        "effective": { "train": cfg, "layers": sizes, "episode_mode": mode },
    });
    let is_final = run.is_complete();
    let ck = Checkpoint::new(run.model, a.init_seed, is_final, run.episodes_done, config.clone());
    ck.save(checkpoint_path)?;
    let report = CurveReport {
        checkpoint: file_name(checkpoint_path),
        fingerprint: ck.header.fingerprint.clone(),
        status,
        is_final: ck.header.is_final,
        episodes_done: run.episodes_done,
        error: error.as_ref().map(|e| e.to_string()),
        curve: run.curve,
    };
    write_json(&with_suffix(checkpoint_path, ".curve.json"), &Envelope::new("train", &config, &report))?;
    if let Some(last) = report.curve.last() {
        println!("{}: {} episodes, final epoch loss {:.5}", checkpoint_path.display(), report.episodes_done, last.mean.total);
    }
    Ok((report, error.map(Error::from)))
}

pub fn run(a: &TrainArgs) -> Result<()> {
    let loaded = load_dataset(&a.data)?;
    let ds = &loaded.dataset;
    let mode = episode_mode(a.consistency.as_ref(), ds, loaded.sidecar.as_ref())?;
    let sizes = match &a.layers {
        Some(l) => l.clone(),
        None => [ds.dim()].into_iter().chain(DEFAULT_HIDDEN).collect(),
    };

    let Some(sweep) = &a.sweep else {
        let (_, err) = run_one(a, ds, mode.as_ref(), &sizes, &a.output)?;
        return err.map_or(Ok(()), Err);
    };
    let (key, values) = sweep.split_once('=').ok_or_else(|| Error::Usage(format!("--sweep {sweep:?} is not KEY=V1,V2,...")))?;
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Usage("--sweep needs at least one value".into()));
    }
    // validate every variant before spending time on any run
    let variants = values.iter().map(|v| a.with_override(key, v)).collect::<Result<Vec<_>>>()?;
    for v in &variants {
        v.train_config().validate()?;
    }
    let ext = a.output.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    let mut runs = Vec::new();
    let mut first_error = None;
    for (value, variant) in values.iter().zip(&variants) {
        let path = with_suffix(&a.output, &format!(".{key}={value}{ext}"));
        let (report, err) = run_one(variant, ds, mode.as_ref(), &sizes, &path)?;
        runs.push(serde_json::json!({
            "value": value,
            "checkpoint": report.checkpoint,
            "curve": file_name(&with_suffix(&path, ".curve.json")),
            "status": report.status,
            "final_loss": report.curve.last().map(|s| s.mean.total),
        }));
        first_error = first_error.or(err);
    }
    let config = serde_json::json!({ "args": a, "sweep": { "key": key, "values": values } });
    write_json(&with_suffix(&a.output, ".sweep.json"), &Envelope::new("train", &config, &runs))?;
    first_error.map_or(Ok(()), Err)
}
