//! Episodic training of a feed-forward embedding with hand-written gradients.

mod gradcheck;
mod loss;
mod model;
mod optim;
mod train;

pub use gradcheck::{grad_check, relative_error, MAX_CHECKED, REL_FLOOR};
pub use loss::{
    embedding_loss, loss_and_full_grads, surrogate_loss, surrogate_loss_and_grads, EmbeddingLoss, LossBreakdown,
    LossConfig, LossGradients, TrainConditional, DEFAULT_UNROLL,
};
pub use model::{fingerprint_of, EmbeddingModel, ForwardCache};
pub use optim::{Optimizer, OptimizerConfig};
pub use train::{train, EpochSummary, TrainConfig, TrainObserver, TrainRun, TrainStatus};
