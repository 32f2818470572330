//! Entropic optimal transport between two weighted finite point sets.
//!
//! The plan solves
//!
//! ```text
//! minimize   sum_ij p_ij C_ij - gamma * H(p)
//! subject to sum_j p_ij = R_i,  sum_i p_ij = C_j,  p >= 0
//! ```
//!
//! with `H(p) = -sum p log p`. The optimum has the form `p_ij = u_i K_ij v_j`
//! with `K = exp(-C / gamma)`; Sinkhorn alternately rescales `u` and `v` so
//! that row and column marginals hold. The log-domain variant keeps
//! `f = log u`, `g = log v` and `-C / gamma` and replaces sums by
//! log-sum-exp, which survives small `gamma` and large costs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::math::{exp, ln, log_sum_exp, squared_distance};
use crate::matrix::Matrix;

/// Marginal sums must equal one within this slack.
pub const MARGINAL_SUM_SLACK: f64 = 1e-9;

/// Nonnegative finite `n x k` transport costs (squared Euclidean distances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix(Matrix);

impl CostMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            bail!(Shape, "cost matrix must be non-empty, got {}x{}", values.rows(), values.cols());
        }
        if let Some(bad) = values.as_slice().iter().find(|c| !c.is_finite() || **c < 0.0) {
            bail!(Argument, "cost entries must be finite and nonnegative, found {bad}");
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn k(&self) -> usize {
        self.0.cols()
    }

    /// Multiplies every cost by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.0.scale(s))
    }
}

/// Squared Euclidean distances between every point and every centroid.
pub fn build_cost_matrix(points: &Matrix, centroids: &Matrix) -> Result<CostMatrix> {
    if points.cols() != centroids.cols() {
        bail!(Shape, "points have dimension {}, centroids {}", points.cols(), centroids.cols());
    }
    if points.cols() == 0 || points.rows() == 0 || centroids.rows() == 0 {
        bail!(Shape, "need n, k, d >= 1 (got n={}, k={}, d={})", points.rows(), centroids.rows(), points.cols());
    }
    if !points.is_finite() || !centroids.is_finite() {
        bail!(Numeric, "non-finite coordinates in points or centroids");
    }
    let mut values = Matrix::zeros(points.rows(), centroids.rows());
    for (i, x) in points.iter_rows().enumerate() {
        for (j, c) in centroids.iter_rows().enumerate() {
            values[(i, j)] = squared_distance(x, c);
        }
    }
    CostMatrix::new(values)
}

/// Row (data) and column (centroid) weights, each positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    row_weights: Vec<f64>,
    col_weights: Vec<f64>,
}

impl Marginals {
    pub fn new(row_weights: Vec<f64>, col_weights: Vec<f64>) -> Result<Self> {
        check_weights("row", &row_weights)?;
        check_weights("column", &col_weights)?;
        Ok(Self { row_weights, col_weights })
    }

    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            bail!(Argument, "uniform marginals need n, k >= 1");
        }
        Ok(Self { row_weights: vec![1.0 / n as f64; n], col_weights: vec![1.0 / k as f64; k] })
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn col_weights(&self) -> &[f64] {
        &self.col_weights
    }
}

fn check_weights(which: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        bail!(Argument, "{which} weights are empty");
    }
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        bail!(Argument, "{which} weights must be positive and finite, found {bad}");
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > MARGINAL_SUM_SLACK {
        bail!(Argument, "{which} weights sum to {sum}, expected 1");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornOptions {
    /// Stop once the worst row or column marginal violation is at most this.
    pub tolerance: f64,
    pub max_iters: usize,
    pub log_domain: bool,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_iters: 1000, log_domain: true }
    }
}

/// Dual variables and convergence record of a Sinkhorn run.
///
/// In log-domain mode `u`, `v` hold `log u`, `log v` and `kernel` holds
/// `-cost / gamma`; in plain mode they hold the scalings and `exp(-cost / gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkhornState {
    pub log_domain: bool,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub kernel: Matrix,
    pub gamma: f64,
    pub iterations_run: usize,
    pub max_marginal_violation: f64,
    pub converged: bool,
}

impl SinkhornState {
    /// Column duals in log form, whatever the execution mode.
    pub fn log_col_duals(&self) -> Vec<f64> {
        if self.log_domain {
            self.v.clone()
        } else {
            self.v.iter().map(|&v| ln(v)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub plan: Matrix,
    pub marginals: Marginals,
    pub state: SinkhornState,
}

impl TransportPlan {
    pub fn converged(&self) -> bool {
        self.state.converged
    }

    /// Worst absolute deviation of the plan's row and column sums from the marginals.
    pub fn marginal_violation(&self) -> f64 {
        marginal_violation(&self.plan, &self.marginals)
    }
}

fn marginal_violation(plan: &Matrix, marginals: &Marginals) -> f64 {
    let rows = plan.row_sums();
    let cols = plan.col_sums();
    let r = rows.iter().zip(marginals.row_weights()).map(|(a, b)| (a - b).abs());
    let c = cols.iter().zip(marginals.col_weights()).map(|(a, b)| (a - b).abs());
    r.chain(c).fold(0.0, f64::max)
}

/// Solves the entropic OT problem, starting from `v = 1`.
pub fn sinkhorn(cost: &CostMatrix, marginals: &Marginals, gamma: f64, opts: &SinkhornOptions) -> Result<TransportPlan> {
    sinkhorn_warm(cost, marginals, gamma, opts, None)
}

/// Like [`sinkhorn`], but starts the column duals at `log_v` when given.
///
/// A run that hits `max_iters` is returned with `state.converged == false`.
pub fn sinkhorn_warm(
    cost: &CostMatrix,
    marginals: &Marginals,
    gamma: f64,
    opts: &SinkhornOptions,
    log_v: Option<&[f64]>,
) -> Result<TransportPlan> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        bail!(Argument, "gamma must be > 0, got {gamma}");
    }
    let (n, k) = (cost.n(), cost.k());
    if marginals.row_weights().len() != n || marginals.col_weights().len() != k {
        bail!(
            Shape,
            "marginals of length {}/{} for a {n}x{k} cost",
            marginals.row_weights().len(),
            marginals.col_weights().len()
        );
    }
    if let Some(g) = log_v {
        if g.len() != k || g.iter().any(|x| !x.is_finite()) {
            bail!(Argument, "warm-start duals must be {k} finite values");
        }
    }
    if opts.max_iters == 0 {
        bail!(Argument, "max_iters must be at least 1");
    }
    if opts.log_domain {
        sinkhorn_log(cost, marginals, gamma, opts, log_v)
    } else {
        sinkhorn_plain(cost, marginals, gamma, opts, log_v)
    }
}

fn sinkhorn_log(
    cost: &CostMatrix,
    marginals: &Marginals,
    gamma: f64,
    opts: &SinkhornOptions,
    log_v: Option<&[f64]>,
) -> Result<TransportPlan> {
    let (n, k) = (cost.n(), cost.k());
    let s = cost.values().scale(-1.0 / gamma);
    let log_r: Vec<f64> = marginals.row_weights().iter().map(|&w| ln(w)).collect();
    let log_c: Vec<f64> = marginals.col_weights().iter().map(|&w| ln(w)).collect();
    let mut f = vec![0.0; n];
    let mut g = log_v.map_or_else(|| vec![0.0; k], <[f64]>::to_vec);
    let mut plan = Matrix::zeros(n, k);
    let mut violation = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        for i in 0..n {
            let row = s.row(i);
            f[i] = log_r[i] - log_sum_exp(row.iter().zip(&g).map(|(a, b)| a + b));
        }
        for j in 0..k {
            g[j] = log_c[j] - log_sum_exp((0..n).map(|i| s[(i, j)] + f[i]));
        }
        fill_log_plan(&mut plan, &s, &f, &g);
        violation = marginal_violation(&plan, marginals);
        if !violation.is_finite() {
            bail!(Numeric, "log-domain Sinkhorn produced non-finite values at iteration {iterations}");
        }
        if violation <= opts.tolerance {
            break;
        }
    }

    Ok(TransportPlan {
        plan,
        marginals: marginals.clone(),
        state: SinkhornState {
            log_domain: true,
            u: f,
            v: g,
            kernel: s,
            gamma,
            iterations_run: iterations,
            max_marginal_violation: violation,
            converged: violation <= opts.tolerance,
        },
    })
}

fn fill_log_plan(plan: &mut Matrix, s: &Matrix, f: &[f64], g: &[f64]) {
    for (i, fi) in f.iter().enumerate() {
        let srow = s.row(i);
        for ((p, sij), gj) in plan.row_mut(i).iter_mut().zip(srow).zip(g) {
            *p = exp(fi + sij + gj);
        }
    }
}

fn sinkhorn_plain(
    cost: &CostMatrix,
    marginals: &Marginals,
    gamma: f64,
    opts: &SinkhornOptions,
    log_v: Option<&[f64]>,
) -> Result<TransportPlan> {
    let (n, k) = (cost.n(), cost.k());
    let kernel = cost.values().map(|c| exp(-c / gamma));
    let mut u = vec![1.0; n];
    let mut v = log_v.map_or_else(|| vec![1.0; k], |g| g.iter().map(|&x| exp(x)).collect());
    let mut plan = Matrix::zeros(n, k);
    let mut violation = f64::INFINITY;
    let mut iterations = 0;
    let breakdown = |iteration: usize| -> Error {
        Error::Numeric(format!(
            "plain Sinkhorn under/overflowed at iteration {iteration} (gamma too small for the cost scale); use log-domain mode"
        ))
    };

    while iterations < opts.max_iters {
        iterations += 1;
        for i in 0..n {
            let kv: f64 = kernel.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            u[i] = marginals.row_weights()[i] / kv;
            if !(u[i].is_finite() && u[i] > 0.0) {
                return Err(breakdown(iterations));
            }
        }
        for j in 0..k {
            let ku: f64 = (0..n).map(|i| kernel[(i, j)] * u[i]).sum();
            v[j] = marginals.col_weights()[j] / ku;
            if !(v[j].is_finite() && v[j] > 0.0) {
                return Err(breakdown(iterations));
            }
        }
        for i in 0..n {
            let ui = u[i];
            for ((p, kij), vj) in plan.row_mut(i).iter_mut().zip(kernel.row(i)).zip(&v) {
                *p = ui * kij * vj;
            }
        }
        violation = marginal_violation(&plan, marginals);
        if !violation.is_finite() {
            return Err(breakdown(iterations));
        }
        if violation <= opts.tolerance {
            break;
        }
    }

    Ok(TransportPlan {
        plan,
        marginals: marginals.clone(),
        state: SinkhornState {
            log_domain: false,
            u,
            v,
            kernel,
            gamma,
            iterations_run: iterations,
            max_marginal_violation: violation,
            converged: violation <= opts.tolerance,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportObjective {
    /// `sum p_ij C_ij`
    pub cost_term: f64,
    /// `H(p) = -sum p_ij log p_ij`, with `0 log 0 = 0`.
    pub entropy: f64,
    /// `cost_term - gamma * entropy`
    pub regularized: f64,
}

pub fn entropy(plan: &Matrix) -> f64 {
    -plan.as_slice().iter().filter(|&&p| p > 0.0).map(|&p| p * ln(p)).sum::<f64>()
}

pub fn transport_objective(cost: &CostMatrix, plan: &Matrix, gamma: f64) -> Result<TransportObjective> {
    if plan.rows() != cost.n() || plan.cols() != cost.k() {
        bail!(Shape, "plan is {}x{}, cost is {}x{}", plan.rows(), plan.cols(), cost.n(), cost.k());
    }
    if let Some(bad) = plan.as_slice().iter().find(|p| !(**p >= 0.0)) {
        bail!(Argument, "plan entries must be nonnegative, found {bad}");
    }
    let cost_term: f64 = plan.as_slice().iter().zip(cost.values().as_slice()).map(|(p, c)| p * c).sum();
    let entropy = entropy(plan);
    Ok(TransportObjective { cost_term, entropy, regularized: cost_term - gamma * entropy })
}

/// Projects a nonnegative plan onto the transport polytope of `marginals`:
/// rows, then columns, are scaled down to their targets and the remaining
/// deficit is added back as a rank-one term. Feasible plans come back
/// unchanged up to rounding.
pub fn round_to_marginals(plan: &Matrix, marginals: &Marginals) -> Result<Matrix> {
    let (r, c) = (marginals.row_weights(), marginals.col_weights());
    if plan.rows() != r.len() || plan.cols() != c.len() {
        bail!(Shape, "plan is {}x{}, marginals are {}/{}", plan.rows(), plan.cols(), r.len(), c.len());
    }
    let mut x = plan.clone();
    for (i, s) in plan.row_sums().into_iter().enumerate() {
        if s > r[i] {
            let f = r[i] / s;
            x.row_mut(i).iter_mut().for_each(|p| *p *= f);
        }
    }
    let cols = x.col_sums();
    for i in 0..x.rows() {
        for (j, p) in x.row_mut(i).iter_mut().enumerate() {
            if cols[j] > c[j] {
                *p *= c[j] / cols[j];
            }
        }
    }
    let err_r: Vec<f64> = x.row_sums().iter().zip(r).map(|(s, w)| (w - s).max(0.0)).collect();
    let err_c: Vec<f64> = x.col_sums().iter().zip(c).map(|(s, w)| (w - s).max(0.0)).collect();
    let total: f64 = err_r.iter().sum();
    if total > 0.0 {
        for (i, er) in err_r.iter().enumerate() {
            for (p, ec) in x.row_mut(i).iter_mut().zip(&err_c) {
                *p += er * ec / total;
            }
        }
    }
    Ok(x)
}

impl TransportPlan {
    /// Value of the dual of the regularized problem at the run's final duals:
    /// `gamma * (<f, R> + <g, C> + 1 - sum p)` with `p = exp(f + s + g)`.
    ///
    /// It equals the optimal regularized objective at convergence, and its
    /// error is quadratic in the marginal violation where the primal value of
    /// the current plan is off to first order.
    pub fn dual_objective(&self) -> f64 {
        let st = &self.state;
        let (f, g) = if st.log_domain {
            (st.u.clone(), st.v.clone())
        } else {
            (st.u.iter().map(|&u| ln(u)).collect(), st.v.iter().map(|&v| ln(v)).collect())
        };
        let dot = |x: &[f64], w: &[f64]| x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        let mass: f64 = self.plan.as_slice().iter().sum();
        st.gamma * (dot(&f, self.marginals.row_weights()) + dot(&g, self.marginals.col_weights()) + 1.0 - mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn cost(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn plain() -> SinkhornOptions {
        SinkhornOptions { log_domain: false, ..Default::default() }
    }

    #[test]
    fn cost_matrix_examples() {
        let c = build_cost_matrix(&Matrix::from_rows(&[[0.0, 0.0]]).unwrap(), &Matrix::from_rows(&[[0.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(c.values().as_slice(), &[0.0]);

        let pts = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = build_cost_matrix(&pts, &Matrix::zeros(1, 2)).unwrap();
        assert_eq!(c.values().as_slice(), &[1.0, 1.0]);

        let c = build_cost_matrix(
            &Matrix::from_rows(&[[3.0, 4.0]]).unwrap(),
            &Matrix::from_rows(&[[0.0, 0.0], [3.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(c.values().as_slice(), &[25.0, 16.0]);
    }

    #[test]
    fn cost_matrix_matches_scalar_loop() {
        let mut rng = stream_rng(3, 0);
        let pts = Matrix::new(7, 3, (0..21).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let cen = Matrix::new(4, 3, (0..12).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let c = build_cost_matrix(&pts, &cen).unwrap();
        for i in 0..7 {
            for j in 0..4 {
                let mut d = 0.0;
                for t in 0..3 {
                    let diff = pts[(i, t)] - cen[(j, t)];
                    d += diff * diff;
                }
                assert!((c.values()[(i, j)] - d).abs() <= 1e-12 * d.max(1.0));
            }
        }
    }

    #[test]
    fn cost_matrix_shape_error() {
        let err = build_cost_matrix(&Matrix::zeros(2, 2), &Matrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn marginals_validation() {
        assert!(Marginals::new(vec![0.5, 0.5], vec![1.0]).is_ok());
        assert!(Marginals::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Marginals::new(vec![0.5, 0.6], vec![1.0]).is_err());
        assert!(Marginals::new(vec![], vec![1.0]).is_err());
    }

    #[test]
    fn single_centroid_forces_column() {
        let c = cost(&[&[3.0], &[0.5], &[7.0]]);
        let m = Marginals::new(vec![0.2, 0.3, 0.5], vec![1.0]).unwrap();
        for opts in [SinkhornOptions::default(), plain()] {
            let p = sinkhorn(&c, &m, 1.0, &opts).unwrap();
            assert!(p.converged());
            for (i, w) in [0.2, 0.3, 0.5].iter().enumerate() {
                assert!((p.plan[(i, 0)] - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_cost_gives_outer_product() {
        let c = cost(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let m = Marginals::uniform(2, 2).unwrap();
        let p = sinkhorn(&c, &m, 1.0, &SinkhornOptions::default()).unwrap();
        for x in p.plan.as_slice() {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_matches_primal_at_convergence() {
        let c = cost(&[&[0.0, 1.0, 4.0], &[1.0, 0.5, 2.0], &[3.0, 0.2, 0.0], &[2.0, 2.0, 1.0]]);
        let m = Marginals::new(vec![0.25; 4], vec![0.5, 0.3, 0.2]).unwrap();
        for log_domain in [true, false] {
            let opts = SinkhornOptions { tolerance: 1e-13, log_domain, ..Default::default() };
            let p = sinkhorn(&c, &m, 0.7, &opts).unwrap();
            let primal = transport_objective(&c, &p.plan, 0.7).unwrap().regularized;
            assert!((p.dual_objective() - primal).abs() < 1e-11, "{} vs {primal}", p.dual_objective());
        }
        // zero cost, uniform marginals: -ln 4
        let z = sinkhorn(&cost(&[&[0.0, 0.0], &[0.0, 0.0]]), &Marginals::uniform(2, 2).unwrap(), 1.0, &Default::default()).unwrap();
        assert!((z.dual_objective() + 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rounding_lands_on_marginals() {
        let m = Marginals::new(vec![0.25; 4], vec![0.5, 0.3, 0.2]).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..20 {
            let raw = Matrix::new(4, 3, (0..12).map(|_| rng.random_range(0.0..0.2)).collect()).unwrap();
            let x = round_to_marginals(&raw, &m).unwrap();
            assert!(x.as_slice().iter().all(|&p| p >= 0.0));
            for (s, w) in x.row_sums().iter().zip(m.row_weights()) {
                assert!((s - w).abs() < 1e-15);
            }
            for (s, w) in x.col_sums().iter().zip(m.col_weights()) {
                assert!((s - w).abs() < 1e-15);
            }
        }
        let feasible = sinkhorn(&cost(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0], &[0.5, 0.5, 0.5]]), &m, 1.0, &SinkhornOptions { tolerance: 1e-14, ..Default::default() }).unwrap();
        assert!(round_to_marginals(&feasible.plan, &m).unwrap().max_abs_diff(&feasible.plan) < 1e-14);
    }

    #[test]
    fn two_by_two_closed_form() {
        let c = cost(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let m = Marginals::uniform(2, 2).unwrap();
        let p = sinkhorn(&c, &m, 1.0, &SinkhornOptions { tolerance: 1e-12, ..Default::default() }).unwrap();
        let a = 0.5 / (1.0 + exp(-1.0));
        assert!((p.plan[(0, 0)] - a).abs() < 1e-10);
        assert!((p.plan[(0, 0)] - 0.365530).abs() < 1e-5);
        assert!((p.plan[(0, 1)] - (0.5 - a)).abs() < 1e-10);
        let obj = transport_objective(&c, &p.plan, 1.0).unwrap();
        assert!((obj.cost_term - 0.268941).abs() < 1e-5);
    }

    #[test]
    fn objective_examples() {
        let c = cost(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let plan = Matrix::filled(2, 2, 0.25);
        let obj = transport_objective(&c, &plan, 1.0).unwrap();
        assert_eq!(obj.cost_term, 0.0);
        assert!((obj.entropy - 4f64.ln()).abs() < 1e-12);
        assert!((obj.regularized + 4f64.ln()).abs() < 1e-12);

        let sparse = Matrix::from_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap();
        let obj = transport_objective(&c, &sparse, 1.0).unwrap();
        assert!((obj.entropy - 2f64.ln()).abs() < 1e-12);

        assert!(transport_objective(&c, &Matrix::zeros(3, 2), 1.0).is_err());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let c = cost(&[&[0.0, 5.0, 1.0], &[2.0, 0.0, 3.0], &[1.0, 1.0, 0.0]]);
        let m = Marginals::uniform(3, 3).unwrap();
        let p = sinkhorn(&c, &m, 0.05, &SinkhornOptions { max_iters: 1, tolerance: 1e-14, ..Default::default() }).unwrap();
        assert!(!p.converged());
        assert_eq!(p.state.iterations_run, 1);
    }

    #[test]
    fn plain_mode_reports_underflow() {
        let c = cost(&[&[100.0, 200.0], &[300.0, 100.0]]);
        let m = Marginals::uniform(2, 2).unwrap();
        let err = sinkhorn(&c, &m, 1e-3, &plain()).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("log-domain")),
            other => panic!("unexpected {other:?}"),
        }
        let p = sinkhorn(&c, &m, 1e-3, &SinkhornOptions::default()).unwrap();
        assert!(p.plan.is_finite());
    }

    #[test]
    fn gamma_must_be_positive() {
        let c = cost(&[&[0.0]]);
        let m = Marginals::uniform(1, 1).unwrap();
        assert!(matches!(sinkhorn(&c, &m, 0.0, &SinkhornOptions::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn warm_start_reaches_same_plan() {
        let mut rng = stream_rng(11, 0);
        let c = CostMatrix::new(Matrix::new(6, 3, (0..18).map(|_| rng.random_range(0.0..4.0)).collect()).unwrap()).unwrap();
        let m = Marginals::uniform(6, 3).unwrap();
        let opts = SinkhornOptions { tolerance: 1e-12, ..Default::default() };
        let cold = sinkhorn(&c, &m, 0.7, &opts).unwrap();
        let warm = sinkhorn_warm(&c, &m, 0.7, &opts, Some(&cold.state.log_col_duals())).unwrap();
        assert!(warm.plan.max_abs_diff(&cold.plan) < 1e-10);
        assert!(warm.state.iterations_run <= 2);
    }
}
