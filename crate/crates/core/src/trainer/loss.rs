//! Prototype surrogate loss with center loss, and its exact gradient.
//!
//! Class prototypes stand in for cluster centroids. Query points are
//! classified against the prototypes either by a softmax over negative squared
//! distances or by row-normalizing an entropic transport plan obtained from a
//! fixed number of log-domain Sinkhorn steps. The log-loss on the query set is
//! the surrogate; the center term is the mean squared distance of support
//! embeddings to their class prototype.
//!
//! The Sinkhorn path is differentiated by unrolling: every `f` / `g` dual
//! update is a log-sum-exp whose Jacobian is a row or column softmax, so the
//! backward pass replays the iterations in reverse with the stored softmaxes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::model::EmbeddingModel;
use crate::assign::prototypes;
use crate::episodes::Episode;
use crate::error::{bail, Result};
use crate::math::{exp, ln, log_sum_exp, squared_distance};
use crate::matrix::Matrix;

pub const DEFAULT_UNROLL: usize = 20;

/// Query-set conditionals used by the surrogate loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TrainConditional {
    Softmax { temperature: f64 },
    Sinkhorn { gamma: f64, unroll_iters: usize },
}

impl Default for TrainConditional {
    fn default() -> Self {
        TrainConditional::Sinkhorn { gamma: 1.0, unroll_iters: DEFAULT_UNROLL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub conditional: TrainConditional,
    /// Weight of the center term (lambda).
    pub center_weight: f64,
    /// When false the surrogate is neither computed nor differentiated.
    pub include_surrogate: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { conditional: TrainConditional::default(), center_weight: 1.0, include_surrogate: true }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        match self.conditional {
            TrainConditional::Softmax { temperature } if !(temperature > 0.0 && temperature.is_finite()) => {
                bail!(Argument, "temperature must be > 0, got {temperature}")
            }
            TrainConditional::Sinkhorn { gamma, .. } if !(gamma > 0.0 && gamma.is_finite()) => {
                bail!(Argument, "gamma must be > 0, got {gamma}")
            }
            TrainConditional::Sinkhorn { unroll_iters: 0, .. } => {
                bail!(Argument, "Sinkhorn conditionals need unroll_iters >= 1")
            }
            _ => {}
        }
        if !(self.center_weight >= 0.0 && self.center_weight.is_finite()) {
            bail!(Argument, "center weight must be >= 0, got {}", self.center_weight);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Mean query cross-entropy.
    pub surrogate: f64,
    /// Mean squared distance of support embeddings to their prototype.
    pub center: f64,
    pub center_weight: f64,
    /// `surrogate + center_weight * center`
    pub total: f64,
}

/// Loss and gradients with respect to the support and query embeddings.
#[derive(Debug, Clone)]
pub struct EmbeddingLoss {
    pub breakdown: LossBreakdown,
    pub d_support: Matrix,
    pub d_query: Matrix,
}

/// Row-wise log-softmax of `x` and the matching probabilities.
fn log_softmax_rows(x: &Matrix) -> (Matrix, Matrix) {
    let mut logp = x.clone();
    for i in 0..x.rows() {
        let lse = log_sum_exp(x.row(i).iter().copied());
        for v in logp.row_mut(i) {
            *v -= lse;
        }
    }
    let probs = logp.map(exp);
    (logp, probs)
}

/// Cross-entropy of `logits` against `labels` and its gradient `(P - onehot) / n`.
fn cross_entropy(logits: &Matrix, labels: &[usize]) -> (f64, Matrix) {
    let n = labels.len() as f64;
    let (logp, mut grad) = log_softmax_rows(logits);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        loss -= logp[(i, y)];
        grad[(i, y)] -= 1.0;
    }
    for g in grad.as_mut_slice() {
        *g /= n;
    }
    (loss / n, grad)
}

/// Unrolled log-domain Sinkhorn on `scores = -cost / gamma` with uniform
/// marginals; returns the final column duals and the per-step softmaxes.
struct Unrolled {
    g: Vec<f64>,
    /// `A_t[i][j] = softmax_j(scores_ij + g^{t-1}_j)`
    row_soft: Vec<Matrix>,
    /// `B_t[i][j] = softmax_i(scores_ij + f^t_i)`
    col_soft: Vec<Matrix>,
}

fn unroll_sinkhorn(scores: &Matrix, iters: usize) -> Unrolled {
    let (n, k) = (scores.rows(), scores.cols());
    let log_r = -ln(n as f64);
    let log_c = -ln(k as f64);
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; k];
    let mut row_soft = Vec::with_capacity(iters);
    let mut col_soft = Vec::with_capacity(iters);
    for _ in 0..iters {
        let mut a = Matrix::zeros(n, k);
        for i in 0..n {
            let lse = log_sum_exp(scores.row(i).iter().zip(&g).map(|(s, gj)| s + gj));
            f[i] = log_r - lse;
            for j in 0..k {
                a[(i, j)] = exp(scores[(i, j)] + g[j] - lse);
            }
        }
        let mut b = Matrix::zeros(n, k);
        for j in 0..k {
            let lse = log_sum_exp((0..n).map(|i| scores[(i, j)] + f[i]));
            g[j] = log_c - lse;
            for i in 0..n {
                b[(i, j)] = exp(scores[(i, j)] + f[i] - lse);
            }
        }
        row_soft.push(a);
        col_soft.push(b);
    }
    Unrolled { g, row_soft, col_soft }
}

/// Surrogate + center loss of embedded support/query sets against `k` classes.
pub fn embedding_loss(
    support: &Matrix,
    support_y: &[usize],
    query: &Matrix,
    query_y: &[usize],
    k: usize,
    cfg: &LossConfig,
) -> Result<EmbeddingLoss> {
    cfg.validate()?;
    if support.cols() != query.cols() && query.rows() > 0 {
        bail!(Shape, "support dimension {} differs from query dimension {}", support.cols(), query.cols());
    }
    if query_y.len() != query.rows() {
        bail!(Shape, "{} query labels for {} query points", query_y.len(), query.rows());
    }
    if let Some(&y) = query_y.iter().find(|&&y| y >= k) {
        bail!(Argument, "query label {y} out of range for {k} classes");
    }
    let protos = prototypes(support, support_y, k)?;
    let d = support.cols();
    let (ns, nq) = (support.rows(), query.rows());
    let mut counts = vec![0usize; k];
    for &y in support_y {
        counts[y] += 1;
    }

    let mut d_support = Matrix::zeros(ns, d);
    let mut d_query = Matrix::zeros(nq, d);
    let mut d_protos = Matrix::zeros(k, d);
    let mut surrogate = 0.0;

    if cfg.include_surrogate && nq > 0 {
        let mut dist = Matrix::zeros(nq, k);
        for i in 0..nq {
            for j in 0..k {
                dist[(i, j)] = squared_distance(query.row(i), protos.row(j));
            }
        }
        let d_dist = match cfg.conditional {
            TrainConditional::Softmax { temperature } => {
                let (loss, d_logits) = cross_entropy(&dist.scale(-1.0 / temperature), query_y);
                surrogate = loss;
                d_logits.scale(-1.0 / temperature)
            }
            TrainConditional::Sinkhorn { gamma, unroll_iters } => {
                let scores = dist.scale(-1.0 / gamma);
                let un = unroll_sinkhorn(&scores, unroll_iters);
                // row-normalized plan: softmax_j(scores_ij + g_j)
                let logits = scores.add_row_vector(&un.g)?;
                let (loss, d_logits) = cross_entropy(&logits, query_y);
                surrogate = loss;
                let mut d_scores = d_logits.clone();
                let mut dg = d_logits.col_sums();
                for t in (0..unroll_iters).rev() {
                    let (a, b) = (&un.row_soft[t], &un.col_soft[t]);
                    let mut df = vec![0.0; nq];
                    for i in 0..nq {
                        for j in 0..k {
                            let w = dg[j] * b[(i, j)];
                            d_scores[(i, j)] -= w;
                            df[i] -= w;
                        }
                    }
                    let mut dg_prev = vec![0.0; k];
                    for i in 0..nq {
                        for j in 0..k {
                            let w = df[i] * a[(i, j)];
                            d_scores[(i, j)] -= w;
                            dg_prev[j] -= w;
                        }
                    }
                    dg = dg_prev;
                }
                d_scores.scale(-1.0 / gamma)
            }
        };
        if !surrogate.is_finite() {
            bail!(Numeric, "surrogate loss is not finite ({surrogate})");
        }
        for i in 0..nq {
            for j in 0..k {
                let w = 2.0 * d_dist[(i, j)];
                if w == 0.0 {
                    continue;
                }
                for t in 0..d {
                    let diff = query[(i, t)] - protos[(j, t)];
                    d_query[(i, t)] += w * diff;
                    d_protos[(j, t)] -= w * diff;
                }
            }
        }
    }

    let mut center = 0.0;
    for (s, &y) in support_y.iter().enumerate() {
        center += squared_distance(support.row(s), protos.row(y));
    }
    center /= ns as f64;
    if !center.is_finite() {
        bail!(Numeric, "center loss is not finite ({center})");
    }
    if cfg.center_weight > 0.0 {
        let scale = 2.0 * cfg.center_weight / ns as f64;
        for (s, &y) in support_y.iter().enumerate() {
            for t in 0..d {
                let diff = support[(s, t)] - protos[(y, t)];
                d_support[(s, t)] += scale * diff;
                d_protos[(y, t)] -= scale * diff;
            }
        }
    }

    // prototypes are class means of the support embeddings
    for (s, &y) in support_y.iter().enumerate() {
        let m = counts[y] as f64;
        for t in 0..d {
            d_support[(s, t)] += d_protos[(y, t)] / m;
        }
    }

    let breakdown = LossBreakdown {
        surrogate,
        center,
        center_weight: cfg.center_weight,
        total: surrogate + cfg.center_weight * center,
    };
    if !breakdown.total.is_finite() {
        bail!(Numeric, "total loss is not finite");
    }
    Ok(EmbeddingLoss { breakdown, d_support, d_query })
}

/// Full gradient of the episode loss: model parameters and raw input features.
#[derive(Debug, Clone)]
pub struct LossGradients {
    pub params: Vec<f64>,
    pub support_x: Matrix,
    pub query_x: Matrix,
}

fn run(model: &EmbeddingModel, episode: &Episode, cfg: &LossConfig) -> Result<(LossBreakdown, LossGradients)> {
    let ns = episode.support_x.rows();
    let stacked = episode.support_x.vstack(&episode.query_x)?;
    let cache = model.forward_cached(&stacked)?;
    let (zs, zq) = cache.output.split_rows(ns);
    let loss = embedding_loss(&zs, &episode.support_y, &zq, &episode.query_y, episode.way(), cfg)?;
    let (params, d_input) = model.backward(&cache, &loss.d_support.vstack(&loss.d_query)?)?;
    let (support_x, query_x) = d_input.split_rows(ns);
    Ok((loss.breakdown, LossGradients { params, support_x, query_x }))
}

/// Loss breakdown and parameter gradient for one training episode.
pub fn surrogate_loss_and_grads(model: &EmbeddingModel, episode: &Episode, cfg: &LossConfig) -> Result<(LossBreakdown, Vec<f64>)> {
    run(model, episode, cfg).map(|(b, g)| (b, g.params))
}

/// Like [`surrogate_loss_and_grads`] but also returns input-feature gradients.
pub fn loss_and_full_grads(model: &EmbeddingModel, episode: &Episode, cfg: &LossConfig) -> Result<(LossBreakdown, LossGradients)> {
    run(model, episode, cfg)
}

/// Forward pass only.
pub fn surrogate_loss(model: &EmbeddingModel, episode: &Episode, cfg: &LossConfig) -> Result<LossBreakdown> {
    let ns = episode.support_x.rows();
    let z = model.forward(&episode.support_x.vstack(&episode.query_x)?)?;
    let (zs, zq) = z.split_rows(ns);
    Ok(embedding_loss(&zs, &episode.support_y, &zq, &episode.query_y, episode.way(), cfg)?.breakdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episodes::EpisodeShape;

    fn episode(support: &[&[f64]], support_y: &[usize], query: &[&[f64]], query_y: &[usize], way: usize) -> Episode {
        Episode {
            support_x: Matrix::from_rows(support).unwrap(),
            support_y: support_y.to_vec(),
            query_x: Matrix::from_rows(query).unwrap(),
            query_y: query_y.to_vec(),
            shape: EpisodeShape::new(way, support_y.len() / way, query_y.len() / way),
            semantic_attribute: None,
            support_index: (0..support_y.len()).collect(),
            query_index: (0..query_y.len()).collect(),
            seed: 0,
        }
    }

    #[test]
    fn perfect_classifier_has_zero_surrogate() {
        // prototypes far apart at low temperature: query distribution is one-hot
        let ep = episode(&[&[0.0], &[1000.0]], &[0, 1], &[&[0.0], &[1000.0]], &[0, 1], 2);
        let cfg = LossConfig {
            conditional: TrainConditional::Softmax { temperature: 1.0 },
            center_weight: 0.0,
            include_surrogate: true,
        };
        let b = surrogate_loss(&EmbeddingModel::identity(1).unwrap(), &ep, &cfg).unwrap();
        assert_eq!(b.surrogate, 0.0);
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn collapsed_class_has_zero_center() {
        let ep = episode(&[&[2.0, 1.0], &[2.0, 1.0], &[5.0, 5.0], &[5.0, 5.0]], &[0, 0, 1, 1], &[&[0.0, 0.0], &[1.0, 1.0]], &[0, 1], 2);
        let b = surrogate_loss(&EmbeddingModel::identity(2).unwrap(), &ep, &LossConfig::default()).unwrap();
        assert_eq!(b.center, 0.0);
    }

    #[test]
    fn breakdown_identity() {
        let ep = episode(&[&[0.0, 1.0], &[0.5, 0.0], &[3.0, 2.0], &[2.0, 3.5]], &[0, 0, 1, 1], &[&[0.2, 0.1], &[2.5, 2.5]], &[0, 1], 2);
        let cfg = LossConfig { center_weight: 0.7, ..Default::default() };
        let b = surrogate_loss(&EmbeddingModel::identity(2).unwrap(), &ep, &cfg).unwrap();
        assert!(b.surrogate > 0.0 && b.center > 0.0);
        assert!((b.total - (b.surrogate + 0.7 * b.center)).abs() <= 1e-12);
    }

    #[test]
    fn unroll_must_be_positive() {
        let ep = episode(&[&[0.0], &[1.0]], &[0, 1], &[&[0.0], &[1.0]], &[0, 1], 2);
        let cfg = LossConfig { conditional: TrainConditional::Sinkhorn { gamma: 1.0, unroll_iters: 0 }, ..Default::default() };
        assert!(matches!(surrogate_loss(&EmbeddingModel::identity(1).unwrap(), &ep, &cfg), Err(crate::Error::Argument(_))));
    }

    #[test]
    fn non_finite_loss_names_term() {
        let ep = episode(&[&[0.0], &[1e300]], &[0, 1], &[&[-1e300], &[1.0]], &[0, 1], 2);
        let cfg = LossConfig { conditional: TrainConditional::Softmax { temperature: 1.0 }, ..Default::default() };
        let err = surrogate_loss(&EmbeddingModel::identity(1).unwrap(), &ep, &cfg).unwrap_err();
        match err {
            crate::Error::Numeric(msg) => assert!(msg.contains("surrogate"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unrolled_sinkhorn_columns_are_balanced() {
        let scores = Matrix::from_rows(&[[-1.0, -3.0], [-0.5, -2.0], [-4.0, -0.1], [-2.0, -2.0]]).unwrap();
        let un = unroll_sinkhorn(&scores, 50);
        let plan_cols: Vec<f64> = (0..2)
            .map(|j| (0..4).map(|i| un.col_soft[49][(i, j)]).sum::<f64>())
            .collect();
        for c in plan_cols {
            assert!((c - 1.0).abs() < 1e-12);
        }
        // the plan exp(f + s + g) has uniform column sums 1/k after the final g update
        let probs = log_softmax_rows(&scores.add_row_vector(&un.g).unwrap()).1;
        let total: Vec<f64> = probs.col_sums();
        assert!((total[0] - 2.0).abs() < 1e-6 && (total[1] - 2.0).abs() < 1e-6);
    }
}
