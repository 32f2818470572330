//! Centroid finding: Sinkhorn K-Means and the Lloyd / K-Means++ baseline.
//!
//! Sinkhorn K-Means alternates an entropic-OT assignment step against fixed
//! centroids with a weighted-mean centroid step. Both steps minimize
//!
//! ```text
//! F(p, c) = sum_ij p_ij ||x_i - c_j||^2 - gamma H(p)
//! ```
//!
//! over their own block, so the recorded objective trace is non-increasing.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::assign::nearest_centroid;
use crate::error::{bail, Result};
use crate::math::{argmax, sqrt, squared_distance};
use crate::matrix::Matrix;
use crate::ot::{
    build_cost_matrix, round_to_marginals, sinkhorn_warm, transport_objective, Marginals, SinkhornOptions, SinkhornState,
    TransportPlan,
};
use crate::rng::stream_rng;

/// Soft clusters with less total mass than this are treated as empty.
pub const EMPTY_CLUSTER_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    /// I.i.d. `N(0, sigma^2)` entries around the origin.
    ZeroNoise { sigma: f64 },
    /// D^2 sampling of distinct data points.
    KmeansPp,
    Provided { centroids: Matrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitStrategy {
    pub kind: InitKind,
    pub seed: u64,
}

impl InitStrategy {
    pub fn zero_noise(sigma: f64, seed: u64) -> Self {
        Self { kind: InitKind::ZeroNoise { sigma }, seed }
    }

    pub fn kmeans_pp(seed: u64) -> Self {
        Self { kind: InitKind::KmeansPp, seed }
    }

    pub fn provided(centroids: Matrix) -> Self {
        Self { kind: InitKind::Provided { centroids }, seed: 0 }
    }
}

/// How hard labels are read off a clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    #[default]
    NearestCentroid,
    PlanArgmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClusterWarning {
    EmptyClusterReseeded { iteration: usize, cluster: usize },
    SinkhornNotConverged { iteration: usize, violation: f64 },
    /// The new plan would have raised the objective; the previous plan was kept.
    PlanStepRejected { iteration: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub centroids: Matrix,
    /// Soft assignments `p_ij`; for Lloyd, `1/n` on each point's cluster.
    pub assignments: Matrix,
    pub hard_labels: Vec<usize>,
    pub label_mode: LabelMode,
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub warnings: Vec<ClusterWarning>,
    /// Final Sinkhorn duals (Sinkhorn K-Means only).
    pub sinkhorn: Option<SinkhornState>,
}

impl ClusteringResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// Number of points carrying each hard label.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.rows()];
        for &l in &self.hard_labels {
            sizes[l] += 1;
        }
        sizes
    }
}

pub fn init_centroids(points: &Matrix, k: usize, strategy: &InitStrategy) -> Result<Matrix> {
    if k == 0 {
        bail!(Argument, "k must be at least 1");
    }
    let d = points.cols();
    match &strategy.kind {
        InitKind::ZeroNoise { sigma } => {
            let normal = Normal::new(0.0, *sigma)
                .ok()
                .filter(|_| *sigma > 0.0)
                .ok_or_else(|| crate::Error::Argument(alloc::format!("zero-noise sigma must be > 0, got {sigma}")))?;
            let mut rng = stream_rng(strategy.seed, 0);
            Matrix::new(k, d, (0..k * d).map(|_| normal.sample(&mut rng)).collect())
        }
        InitKind::KmeansPp => kmeans_pp(points, k, strategy.seed),
        InitKind::Provided { centroids } => {
            if centroids.rows() != k || centroids.cols() != d {
                bail!(Shape, "provided centroids are {}x{}, expected {k}x{d}", centroids.rows(), centroids.cols());
            }
            Ok(centroids.clone())
        }
    }
}

fn kmeans_pp(points: &Matrix, k: usize, seed: u64) -> Result<Matrix> {
    let n = points.rows();
    if k > n {
        bail!(Argument, "K-Means++ needs k <= n (k={k}, n={n})");
    }
    let mut rng = stream_rng(seed, 1);
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = points.iter_rows().map(|x| squared_distance(x, points.row(first))).collect();

    while chosen.len() < k {
        let total: f64 = (0..n).filter(|&i| !taken[i]).map(|i| d2[i]).sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !taken[i] && d2[i] > 0.0) {
                pick = Some(i);
                if target < d2[i] {
                    break;
                }
                target -= d2[i];
            }
            pick.expect("positive total implies a candidate")
        } else {
            // every remaining point duplicates a chosen one
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        for (i, x) in points.iter_rows().enumerate() {
            d2[i] = d2[i].min(squared_distance(x, points.row(next)));
        }
    }
    Ok(points.select_rows(&chosen))
}

/// Index of the point farthest from its nearest centroid (lowest index on ties).
fn farthest_point(points: &Matrix, centroids: &Matrix) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in points.iter_rows().enumerate() {
        let d = centroids.iter_rows().map(|c| squared_distance(x, c)).fold(f64::INFINITY, f64::min);
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

fn max_displacement(a: &Matrix, b: &Matrix) -> f64 {
    sqrt(a.iter_rows().zip(b.iter_rows()).map(|(x, y)| squared_distance(x, y)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornKMeansOptions {
    /// Stop when no centroid moves farther than this.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub sinkhorn: SinkhornOptions,
    pub label_mode: LabelMode,
    /// Carry the Sinkhorn column duals across outer iterations.
    pub warm_start: bool,
}

impl Default for SinkhornKMeansOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            max_outer: 100,
            sinkhorn: SinkhornOptions::default(),
            label_mode: LabelMode::NearestCentroid,
            warm_start: true,
        }
    }
}

pub fn sinkhorn_kmeans(
    points: &Matrix,
    k: usize,
    col_weights: &[f64],
    gamma: f64,
    init: &InitStrategy,
    opts: &SinkhornKMeansOptions,
) -> Result<ClusteringResult> {
    let n = points.rows();
    if k == 0 || n < k {
        bail!(Argument, "need n >= k >= 1 (n={n}, k={k})");
    }
    if col_weights.len() != k {
        bail!(Shape, "{} column weights for k={k}", col_weights.len());
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        bail!(Argument, "gamma must be > 0, got {gamma}");
    }
    if !points.is_finite() {
        bail!(Numeric, "points contain NaN or infinite coordinates");
    }
    let marginals = Marginals::new(vec![1.0 / n as f64; n], col_weights.to_vec())?;
    let mut centroids = init_centroids(points, k, init)?;
    let mut warnings = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut duals: Option<Vec<f64>> = None;
    let mut last_plan = None;
    let mut iterations = 0;

    // Alternation on exactly feasible plans: the Sinkhorn plan is rounded onto
    // the marginals and kept only if it does not raise the objective, and the
    // centroid step is the exact minimizer for the kept plan. The trace is
    // therefore non-increasing even when an inner solve stops early.
    let mut kept: Option<Matrix> = None;
    while iterations < opts.max_outer {
        iterations += 1;
        let cost = build_cost_matrix(points, &centroids)?;
        let warm = if opts.warm_start { duals.as_deref() } else { None };
        let plan = sinkhorn_warm(&cost, &marginals, gamma, &opts.sinkhorn, warm)?;
        if !plan.converged() {
            warnings.push(ClusterWarning::SinkhornNotConverged {
                iteration: iterations,
                violation: plan.state.max_marginal_violation,
            });
        }
        let mut q = round_to_marginals(&plan.plan, &marginals)?;
        if let (Some(prev), Some(&best)) = (&kept, trace.last()) {
            if transport_objective(&cost, &q, gamma)?.regularized > best {
                q = prev.clone();
                warnings.push(ClusterWarning::PlanStepRejected { iteration: iterations });
            }
        }

        let mut updated = Matrix::zeros(k, points.cols());
        let mass = q.col_sums();
        for j in 0..k {
            if mass[j] < EMPTY_CLUSTER_MASS {
                continue;
            }
            let row = updated.row_mut(j);
            for (i, x) in points.iter_rows().enumerate() {
                let w = q[(i, j)];
                for (c, v) in row.iter_mut().zip(x) {
                    *c += w * v;
                }
            }
            for c in row.iter_mut() {
                *c /= mass[j];
            }
        }
        for j in (0..k).filter(|&j| mass[j] < EMPTY_CLUSTER_MASS) {
            let far = farthest_point(points, &updated);
            updated.row_mut(j).copy_from_slice(points.row(far));
            warnings.push(ClusterWarning::EmptyClusterReseeded { iteration: iterations, cluster: j });
        }

        trace.push(transport_objective(&build_cost_matrix(points, &updated)?, &q, gamma)?.regularized);
        let moved = max_displacement(&centroids, &updated);
        centroids = updated;
        duals = Some(plan.state.log_col_duals());
        last_plan = Some(TransportPlan { plan: q.clone(), ..plan });
        kept = Some(q);
        if moved <= opts.outer_tol {
            converged = true;
            break;
        }
    }

    let plan = last_plan.expect("max_outer >= 1 runs at least one iteration");
    let hard_labels = match opts.label_mode {
        LabelMode::NearestCentroid => nearest_centroid(points, &centroids)?,
        LabelMode::PlanArgmax => plan.plan.iter_rows().map(argmax).collect(),
    };
    Ok(ClusteringResult {
        centroids,
        assignments: plan.plan,
        hard_labels,
        label_mode: opts.label_mode,
        objective_trace: trace,
        outer_iterations: iterations,
        converged,
        warnings,
        sinkhorn: Some(plan.state),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydOptions {
    pub max_outer: usize,
    pub restarts: usize,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self { max_outer: 100, restarts: 10 }
    }
}

/// Within-cluster sum of squared distances.
pub fn kmeans_objective(points: &Matrix, centroids: &Matrix, labels: &[usize]) -> f64 {
    points.iter_rows().zip(labels).map(|(x, &l)| squared_distance(x, centroids.row(l))).sum()
}

/// Lloyd's algorithm; each restart `r` initializes with stream `r` of `init.seed`.
pub fn lloyd_kmeans(points: &Matrix, k: usize, init: &InitStrategy, opts: &LloydOptions) -> Result<ClusteringResult> {
    let n = points.rows();
    if k == 0 || n < k {
        bail!(Argument, "need n >= k >= 1 (n={n}, k={k})");
    }
    if !points.is_finite() {
        bail!(Numeric, "points contain NaN or infinite coordinates");
    }
    let restarts = opts.restarts.max(1);
    let mut best: Option<ClusteringResult> = None;
    for r in 0..restarts {
        let strategy = InitStrategy { kind: init.kind.clone(), seed: crate::rng::derive_seed(init.seed, r as u64) };
        let run = lloyd_once(points, k, init_centroids(points, k, &strategy)?, opts.max_outer.max(1))?;
        if best.as_ref().is_none_or(|b| run.objective() < b.objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd_once(points: &Matrix, k: usize, mut centroids: Matrix, max_outer: usize) -> Result<ClusteringResult> {
    let n = points.rows();
    let mut labels = nearest_centroid(points, &centroids)?;
    let mut trace = Vec::new();
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_outer {
        iterations += 1;
        let mut sums = Matrix::zeros(k, points.cols());
        let mut counts = vec![0usize; k];
        for (x, &l) in points.iter_rows().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums.row_mut(l).iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for s in sums.row_mut(j) {
                    *s /= counts[j] as f64;
                }
            }
        }
        for j in (0..k).filter(|&j| counts[j] == 0) {
            let far = farthest_point(points, &sums);
            sums.row_mut(j).copy_from_slice(points.row(far));
            warnings.push(ClusterWarning::EmptyClusterReseeded { iteration: iterations, cluster: j });
        }
        centroids = sums;
        trace.push(kmeans_objective(points, &centroids, &labels));
        let relabeled = nearest_centroid(points, &centroids)?;
        if relabeled == labels {
            converged = true;
            break;
        }
        labels = relabeled;
    }

    let mut assignments = Matrix::zeros(n, k);
    for (i, &l) in labels.iter().enumerate() {
        assignments[(i, l)] = 1.0 / n as f64;
    }
    // objective after the final relabeling
    let final_objective = kmeans_objective(points, &centroids, &labels);
    if trace.last().is_none_or(|&t| final_objective < t) {
        trace.push(final_objective);
    }
    Ok(ClusteringResult {
        centroids,
        assignments,
        hard_labels: labels,
        label_mode: LabelMode::NearestCentroid,
        objective_trace: trace,
        outer_iterations: iterations,
        converged,
        warnings,
        sinkhorn: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::optimal_match;
    use crate::rng::stream_rng;
    use rand_distr::StandardNormal;

    fn col(xs: &[f64]) -> Matrix {
        Matrix::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    fn uniform(k: usize) -> Vec<f64> {
        vec![1.0 / k as f64; k]
    }

    #[test]
    fn provided_init_is_passthrough() {
        let c = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let pts = Matrix::zeros(3, 2);
        assert_eq!(init_centroids(&pts, 1, &InitStrategy::provided(c.clone())).unwrap(), c);
        assert!(init_centroids(&pts, 2, &InitStrategy::provided(c)).is_err());
    }

    #[test]
    fn zero_noise_init_is_small_and_reproducible() {
        let pts = Matrix::zeros(10, 5);
        let sigma = 1e-3;
        let a = init_centroids(&pts, 4, &InitStrategy::zero_noise(sigma, 42)).unwrap();
        let b = init_centroids(&pts, 4, &InitStrategy::zero_noise(sigma, 42)).unwrap();
        assert_eq!(a, b);
        let bound = 6.0 * sigma * (2.0 * (20f64).ln()).sqrt();
        assert!(a.as_slice().iter().all(|x| x.abs() < bound));
        assert!(a.as_slice().iter().any(|x| *x != 0.0));
        assert!(init_centroids(&pts, 4, &InitStrategy::zero_noise(0.0, 1)).is_err());
    }

    #[test]
    fn kmeans_pp_two_points() {
        let pts = col(&[0.0, 10.0]);
        for seed in 0..20 {
            let c = init_centroids(&pts, 2, &InitStrategy::kmeans_pp(seed)).unwrap();
            let mut v = c.as_slice().to_vec();
            v.sort_by(f64::total_cmp);
            assert_eq!(v, vec![0.0, 10.0]);
        }
        assert!(init_centroids(&pts, 3, &InitStrategy::kmeans_pp(0)).is_err());
    }

    #[test]
    fn kmeans_pp_picks_distinct_rows_even_with_duplicates() {
        let pts = col(&[1.0, 1.0, 1.0, 1.0]);
        let c = init_centroids(&pts, 3, &InitStrategy::kmeans_pp(3)).unwrap();
        assert_eq!(c.rows(), 3);
    }

    #[test]
    fn one_point_per_cluster() {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]).unwrap();
        let r = sinkhorn_kmeans(&pts, 4, &uniform(4), 0.01, &InitStrategy::zero_noise(1e-3, 1), &Default::default()).unwrap();
        let mut labels = r.hard_labels.clone();
        labels.sort();
        assert_eq!(labels, vec![0, 1, 2, 3]);
        for (i, &l) in r.hard_labels.iter().enumerate() {
            assert!(squared_distance(pts.row(i), r.centroids.row(l)) < 1e-6);
        }
    }

    #[test]
    fn two_one_dimensional_clusters() {
        let pts = col(&[-10.1, -10.05, -10.0, -9.95, -9.9, 9.9, 9.95, 10.0, 10.05, 10.1]);
        let truth = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let r = sinkhorn_kmeans(&pts, 2, &uniform(2), 1.0, &InitStrategy::zero_noise(1e-3, 7), &Default::default()).unwrap();
        let mut c = r.centroids.as_slice().to_vec();
        c.sort_by(f64::total_cmp);
        assert!((c[0] + 10.0).abs() < 0.2 && (c[1] - 10.0).abs() < 0.2, "{c:?}");
        assert_eq!(optimal_match(&r.hard_labels, &truth, 2).unwrap().matched_accuracy, 1.0);
        // brute-force Lloyd fixed point from both orderings
        for init in [[-10.0, 10.0], [10.0, -10.0]] {
            let l = lloyd_kmeans(&pts, 2, &InitStrategy::provided(col(&init)), &LloydOptions { restarts: 1, ..Default::default() }).unwrap();
            for j in 0..2 {
                assert!((l.centroids[(j, 0)] - init[j]).abs() < 0.2);
            }
        }
    }

    #[test]
    fn identical_points_give_uniform_plan() {
        let pts = Matrix::filled(6, 2, 3.0);
        let r = sinkhorn_kmeans(&pts, 2, &uniform(2), 1.0, &InitStrategy::zero_noise(1e-3, 0), &Default::default()).unwrap();
        for c in r.centroids.as_slice() {
            assert!((c - 3.0).abs() < 1e-9);
        }
        for p in r.assignments.as_slice() {
            assert!((p - 1.0 / 12.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nan_points_rejected() {
        let pts = col(&[0.0, f64::NAN]);
        assert!(matches!(
            sinkhorn_kmeans(&pts, 1, &[1.0], 1.0, &InitStrategy::zero_noise(1e-3, 0), &Default::default()),
            Err(crate::Error::Numeric(_))
        ));
    }

    #[test]
    fn lloyd_single_cluster() {
        let pts = col(&[1.0, 2.0, 6.0]);
        let r = lloyd_kmeans(&pts, 1, &InitStrategy::kmeans_pp(0), &Default::default()).unwrap();
        assert!((r.centroids[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((r.objective() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn lloyd_four_points_matches_enumeration() {
        let xs = [0.0, 1.0, 9.0, 10.0];
        // exhaustive 2-partitions
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << 4) - 1 {
            let mut obj = 0.0;
            for side in [true, false] {
                let members: Vec<f64> = (0..4).filter(|i| (mask >> i & 1 == 1) == side).map(|i| xs[i]).collect();
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                obj += members.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            }
            best = best.min(obj);
        }
        assert_eq!(best, 1.0);
        let r = lloyd_kmeans(&col(&xs), 2, &InitStrategy::kmeans_pp(5), &LloydOptions { restarts: 4, ..Default::default() }).unwrap();
        assert!((r.objective() - best).abs() < 1e-12);
        let mut c = r.centroids.as_slice().to_vec();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.5, 9.5]);
    }

    #[test]
    fn lloyd_k_equals_n() {
        let pts = col(&[3.0, -1.0, 8.0]);
        let r = lloyd_kmeans(&pts, 3, &InitStrategy::kmeans_pp(2), &Default::default()).unwrap();
        assert_eq!(r.objective(), 0.0);
    }

    #[test]
    fn lloyd_reseeds_empty_cluster() {
        // both initial centroids far to the right: cluster 1 starts empty
        let pts = col(&[0.0, 1.0, 2.0, 3.0]);
        let init = InitStrategy::provided(col(&[100.0, 200.0]));
        let r = lloyd_kmeans(&pts, 2, &init, &LloydOptions { restarts: 1, ..Default::default() }).unwrap();
        assert!(r.warnings.iter().any(|w| matches!(w, ClusterWarning::EmptyClusterReseeded { .. })));
        assert_eq!(r.cluster_sizes().iter().filter(|&&s| s > 0).count(), 2);
    }

    fn blobs(seed: u64, k: usize, per: usize, d: usize, spread: f64) -> Matrix {
        let mut rng = stream_rng(seed, 0);
        let mut rows = Vec::new();
        for j in 0..k {
            let center: Vec<f64> = (0..d).map(|t| if t == j % d { 10.0 * (1 + j / d) as f64 } else { 0.0 }).collect();
            for _ in 0..per {
                rows.push(center.iter().map(|c| c + spread * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>());
            }
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn objective_trace_descends() {
        for seed in 0..10 {
            let pts = blobs(seed, 3, 8, 2, 2.0);
            let r = sinkhorn_kmeans(&pts, 3, &uniform(3), 1.0, &InitStrategy::zero_noise(1e-3, seed), &Default::default()).unwrap();
            for w in r.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "seed {seed}: {w:?}");
            }
            let l = lloyd_kmeans(&pts, 3, &InitStrategy::kmeans_pp(seed), &LloydOptions { restarts: 1, ..Default::default() }).unwrap();
            for w in l.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn translation_equivariance() {
        let pts = blobs(4, 3, 5, 3, 1.0);
        let shift = [1.5, -2.0, 0.25];
        let moved = pts.add_row_vector(&shift).unwrap();
        let c0 = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let opts = SinkhornKMeansOptions { sinkhorn: SinkhornOptions { tolerance: 1e-12, ..Default::default() }, outer_tol: 1e-10, ..Default::default() };
        let a = sinkhorn_kmeans(&pts, 3, &uniform(3), 1.0, &InitStrategy::provided(c0.clone()), &opts).unwrap();
        let b = sinkhorn_kmeans(&moved, 3, &uniform(3), 1.0, &InitStrategy::provided(c0.add_row_vector(&shift).unwrap()), &opts).unwrap();
        assert!(a.centroids.add_row_vector(&shift).unwrap().max_abs_diff(&b.centroids) <= 1e-9);
    }

    #[test]
    fn permutation_equivariance() {
        let pts = blobs(8, 3, 6, 2, 1.0);
        let n = pts.rows();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let shuffled = pts.select_rows(&perm);
        let init = InitStrategy::zero_noise(1e-3, 3);
        let opts = SinkhornKMeansOptions { sinkhorn: SinkhornOptions { tolerance: 1e-12, ..Default::default() }, outer_tol: 1e-10, ..Default::default() };
        let a = sinkhorn_kmeans(&pts, 3, &uniform(3), 1.0, &init, &opts).unwrap();
        let b = sinkhorn_kmeans(&shuffled, 3, &uniform(3), 1.0, &init, &opts).unwrap();
        assert!(a.centroids.max_abs_diff(&b.centroids) < 1e-6);
        let a_perm: Vec<usize> = perm.iter().map(|&i| a.hard_labels[i]).collect();
        assert_eq!(a_perm, b.hard_labels);
    }

    #[test]
    fn lloyd_limit_consistency() {
        for seed in 0..5 {
            let pts = blobs(seed + 100, 4, 5, 4, 0.5);
            let s = sinkhorn_kmeans(&pts, 4, &uniform(4), 1e-3, &InitStrategy::kmeans_pp(seed), &Default::default()).unwrap();
            let l = lloyd_kmeans(&pts, 4, &InitStrategy::kmeans_pp(seed), &Default::default()).unwrap();
            assert_eq!(optimal_match(&s.hard_labels, &l.hard_labels, 4).unwrap().matched_accuracy, 1.0);
        }
    }

    #[test]
    fn non_uniform_weights_shift_mass() {
        let pts = col(&[0.0, 0.1, 0.2, 5.0]);
        let r = sinkhorn_kmeans(&pts, 2, &[0.75, 0.25], 0.1, &InitStrategy::provided(col(&[0.0, 5.0])), &Default::default()).unwrap();
        let mass = r.assignments.col_sums();
        assert!((mass[0] - 0.75).abs() < 1e-6 && (mass[1] - 0.25).abs() < 1e-6);
        assert!((r.centroids[(1, 0)] - 5.0).abs() < 0.1);
    }
}
