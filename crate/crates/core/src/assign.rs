//! Per-point class distributions from centroids or prototypes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::math::{argmax, argmin, exp, squared_distance};
use crate::matrix::Matrix;
use crate::ot::TransportPlan;

/// How distances to centroids become class probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConditionalConfig {
    Softmax { temperature: f64 },
    Sinkhorn { gamma: f64 },
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        ConditionalConfig::Softmax { temperature: 1.0 }
    }
}

impl ConditionalConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConditionalConfig::Softmax { temperature } if !(temperature > 0.0 && temperature.is_finite()) => {
                bail!(Argument, "temperature must be > 0, got {temperature}")
            }
            ConditionalConfig::Sinkhorn { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                bail!(Argument, "gamma must be > 0, got {gamma}")
            }
            _ => Ok(()),
        }
    }
}

/// `n x k` matrix whose rows lie on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probs: Matrix,
}

impl ClassDistribution {
    /// Wraps a matrix after checking every row is a distribution (within 1e-9).
    pub fn new(probs: Matrix) -> Result<Self> {
        for (i, row) in probs.iter_rows().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                bail!(Numeric, "row {i} is not a probability distribution (sum {sum})");
            }
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &Matrix {
        &self.probs
    }
}

pub fn softmax_conditionals(points: &Matrix, centroids: &Matrix, temperature: f64) -> Result<ClassDistribution> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        bail!(Argument, "temperature must be > 0, got {temperature}");
    }
    if points.cols() != centroids.cols() {
        bail!(Shape, "points have dimension {}, centroids {}", points.cols(), centroids.cols());
    }
    if centroids.rows() == 0 {
        bail!(Shape, "need at least one centroid");
    }
    if !points.is_finite() || !centroids.is_finite() {
        bail!(Numeric, "non-finite coordinates");
    }
    let k = centroids.rows();
    let mut probs = Matrix::zeros(points.rows(), k);
    let mut dist = vec![0.0; k];
    for (i, x) in points.iter_rows().enumerate() {
        for (d, c) in dist.iter_mut().zip(centroids.iter_rows()) {
            *d = squared_distance(x, c);
        }
        let dmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let row = probs.row_mut(i);
        let mut total = 0.0;
        for (p, d) in row.iter_mut().zip(&dist) {
            *p = exp(-(d - dmin) / temperature);
            total += *p;
        }
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(ClassDistribution { probs })
}

/// Row-normalizes a transport plan.
pub fn sinkhorn_conditionals(plan: &TransportPlan) -> Result<ClassDistribution> {
    let mut probs = plan.plan.clone();
    for i in 0..probs.rows() {
        let row = probs.row_mut(i);
        let sum: f64 = row.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            bail!(Numeric, "transport plan row {i} has sum {sum}");
        }
        for p in row.iter_mut() {
            *p /= sum;
        }
    }
    Ok(ClassDistribution { probs })
}

/// Class means of `points` grouped by `labels` in `0..k`.
pub fn prototypes(points: &Matrix, labels: &[usize], k: usize) -> Result<Matrix> {
    if labels.len() != points.rows() {
        bail!(Shape, "{} labels for {} points", labels.len(), points.rows());
    }
    let mut sums = Matrix::zeros(k, points.cols());
    let mut counts = vec![0usize; k];
    for (x, &y) in points.iter_rows().zip(labels) {
        if y >= k {
            bail!(Argument, "label {y} out of range for {k} classes");
        }
        counts[y] += 1;
        for (s, v) in sums.row_mut(y).iter_mut().zip(x) {
            *s += v;
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        bail!(Argument, "class {empty} has no labeled points");
    }
    for (j, &c) in counts.iter().enumerate() {
        for s in sums.row_mut(j) {
            *s /= c as f64;
        }
    }
    Ok(sums)
}

/// Row-wise argmax; ties go to the lowest index.
pub fn hard_assign(dist: &ClassDistribution) -> Vec<usize> {
    dist.probs.iter_rows().map(argmax).collect()
}

/// Index of the nearest centroid for every point; ties go to the lowest index.
pub fn nearest_centroid(points: &Matrix, centroids: &Matrix) -> Result<Vec<usize>> {
    if points.cols() != centroids.cols() {
        bail!(Shape, "points have dimension {}, centroids {}", points.cols(), centroids.cols());
    }
    if centroids.rows() == 0 {
        bail!(Shape, "need at least one centroid");
    }
    let mut dist = vec![0.0; centroids.rows()];
    Ok(points
        .iter_rows()
        .map(|x| {
            for (d, c) in dist.iter_mut().zip(centroids.iter_rows()) {
                *d = squared_distance(x, c);
            }
            argmin(&dist)
        })
        .collect())
}
