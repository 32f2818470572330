//! Optimal one-to-one matching of predicted clusters to ground-truth classes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingResult {
    /// `permutation[cluster] = class`
    pub permutation: Vec<usize>,
    pub matched_accuracy: f64,
    /// `agreement[cluster][class]` = number of points in both.
    pub agreement: Vec<Vec<usize>>,
}

impl MatchingResult {
    pub fn relabel(&self, clusters: &[usize]) -> Vec<usize> {
        clusters.iter().map(|&c| self.permutation[c]).collect()
    }
}

/// Minimum-cost perfect matching on a square `k x k` cost matrix (row-major).
///
/// Shortest augmenting paths with potentials, `O(k^3)`. Returns the column
/// assigned to each row.
pub fn min_cost_assignment(cost: &[i64], k: usize) -> Vec<usize> {
    assert_eq!(cost.len(), k * k, "cost must be k x k");
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is the virtual source
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for row in 1..=k {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut min_to = vec![INF; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = INF;
            let mut col1 = 0usize;
            for col in 1..=k {
                if used[col] {
                    continue;
                }
                let reduced = cost[(r - 1) * k + (col - 1)] - u[r] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    col1 = col;
                }
            }
            for col in 0..=k {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; k];
    for col in 1..=k {
        if owner[col] != 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Best cluster-to-class permutation by maximizing the trace of the
/// agreement-count matrix.
pub fn optimal_match(pred: &[usize], truth: &[usize], k: usize) -> Result<MatchingResult> {
    if pred.len() != truth.len() {
        bail!(Shape, "{} predictions for {} labels", pred.len(), truth.len());
    }
    if pred.is_empty() || k == 0 {
        bail!(Argument, "matching needs n >= 1 and k >= 1");
    }
    let mut agreement = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k || t >= k {
            bail!(Argument, "id out of range: predicted {p}, true {t}, k={k}");
        }
        agreement[p][t] += 1;
    }
    let cost: Vec<i64> = agreement.iter().flatten().map(|&a| -(a as i64)).collect();
    let permutation = min_cost_assignment(&cost, k);
    let hits: usize = permutation.iter().enumerate().map(|(c, &y)| agreement[c][y]).sum();
    Ok(MatchingResult { permutation, matched_accuracy: hits as f64 / pred.len() as f64, agreement })
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if pred.is_empty() {
        return f64::NAN;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / pred.len() as f64
}
