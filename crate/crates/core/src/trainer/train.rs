use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::loss::{surrogate_loss_and_grads, LossBreakdown, LossConfig};
use super::model::EmbeddingModel;
use super::optim::{Optimizer, OptimizerConfig};
use crate::episodes::{ConsistencyMode, EpisodeSampler, EpisodeShape, LabeledDataset};
use crate::error::{bail, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub optimizer: OptimizerConfig,
    pub episodes_per_epoch: usize,
    pub epochs: usize,
    /// Training episode shape; may use a larger way than evaluation.
    pub shape: EpisodeShape,
    /// Seed of the training episode stream.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            optimizer: OptimizerConfig::default(),
            episodes_per_epoch: 100,
            epochs: 10,
            shape: EpisodeShape::new(5, 5, 15),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn total_episodes(&self) -> usize {
        self.episodes_per_epoch * self.epochs
    }

    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.optimizer.validate()?;
        if self.episodes_per_epoch == 0 {
            bail!(Argument, "episodes_per_epoch must be >= 1");
        }
        if self.shape.query == 0 && self.loss.include_surrogate {
            bail!(Argument, "the surrogate loss needs query >= 1");
        }
        Ok(())
    }
}

/// Mean loss terms over one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub episodes: usize,
    pub mean: LossBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainStatus {
    Completed,
    /// The observer asked to stop; the model holds the last applied update.
    Stopped,
    /// A non-finite loss or update; the model is the last finite one.
    Diverged { episode: usize, error: Error },
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub model: EmbeddingModel,
    pub curve: Vec<EpochSummary>,
    pub status: TrainStatus,
    pub episodes_done: usize,
}

impl TrainRun {
    pub fn is_complete(&self) -> bool {
        self.status == TrainStatus::Completed
    }
}

/// Progress hooks; both methods have no-op defaults.
pub trait TrainObserver {
    fn on_epoch(&mut self, _summary: &EpochSummary, _model: &EmbeddingModel) {}

    /// Polled before every episode.
    fn should_stop(&mut self, _episodes_done: usize) -> bool {
        false
    }
}

impl TrainObserver for () {}

struct Accumulator {
    sum: LossBreakdown,
    n: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self { sum: LossBreakdown::default(), n: 0 }
    }

    fn add(&mut self, b: &LossBreakdown) {
        self.sum.surrogate += b.surrogate;
        self.sum.center += b.center;
        self.sum.total += b.total;
        self.sum.center_weight = b.center_weight;
        self.n += 1;
    }

    fn take(&mut self, epoch: usize) -> Option<EpochSummary> {
        if self.n == 0 {
            return None;
        }
        let n = self.n as f64;
        let mean = LossBreakdown {
            surrogate: self.sum.surrogate / n,
            center: self.sum.center / n,
            center_weight: self.sum.center_weight,
            total: self.sum.total / n,
        };
        let out = EpochSummary { epoch, episodes: self.n, mean };
        *self = Self::new();
        Some(out)
    }
}

/// Episodic training. Episode `i` is `sampler.sample(cfg.seed, i)`, so a run
/// is a pure function of the dataset, the initial model and `cfg`.
pub fn train(
    dataset: &LabeledDataset,
    mode: Option<&ConsistencyMode>,
    model: EmbeddingModel,
    cfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<TrainRun> {
    cfg.validate()?;
    if model.input_dim() != dataset.dim() {
        bail!(Shape, "model input dimension {} does not match data dimension {}", model.input_dim(), dataset.dim());
    }
    let sampler = EpisodeSampler::new(dataset, cfg.shape, mode)?;
    let mut model = model;
    let mut opt = Optimizer::new(cfg.optimizer, model.param_count());
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut done = 0usize;

    for epoch in 0..cfg.epochs {
        let mut acc = Accumulator::new();
        for _ in 0..cfg.episodes_per_epoch {
            if observer.should_stop(done) {
                if let Some(s) = acc.take(epoch) {
                    observer.on_epoch(&s, &model);
                    curve.push(s);
                }
                return Ok(TrainRun { model, curve, status: TrainStatus::Stopped, episodes_done: done });
            }
            let episode = sampler.sample(cfg.seed, done as u64);
            let diverged = |model, curve, error| {
                Ok(TrainRun { model, curve, status: TrainStatus::Diverged { episode: done, error }, episodes_done: done })
            };
            let (breakdown, grads) = match surrogate_loss_and_grads(&model, &episode, &cfg.loss) {
                Ok(v) => v,
                Err(e @ Error::Numeric(_)) => return diverged(model, curve, e),
                Err(e) => return Err(e),
            };
            let mut next = model.params().to_vec();
            opt.step(&mut next, &grads);
            if next.iter().any(|p| !p.is_finite()) {
                return diverged(model, curve, Error::Numeric("parameter update produced non-finite values".into()));
            }
            model.params_mut().copy_from_slice(&next);
            acc.add(&breakdown);
            done += 1;
        }
        if let Some(s) = acc.take(epoch) {
            observer.on_epoch(&s, &model);
            curve.push(s);
        }
    }
    Ok(TrainRun { model, curve, status: TrainStatus::Completed, episodes_done: done })
}
