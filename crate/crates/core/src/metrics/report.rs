//! Aggregation of per-episode accuracies and the consistency ratio.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::math::sqrt;

pub const CLUSTERING_ACCURACY: &str = "clustering_accuracy";
pub const UNSUPERVISED_ACCURACY: &str = "unsupervised_accuracy";
pub const SUPERVISED_ACCURACY: &str = "supervised_accuracy";

/// z-score of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    pub index: u64,
    pub way: usize,
    pub shot: usize,
    pub seed: u64,
    pub semantic_attribute: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub clustering_accuracy: Option<f64>,
    pub unsupervised_accuracy: Option<f64>,
    pub supervised_accuracy: Option<f64>,
    pub meta: EpisodeMeta,
    /// False when the clustering step stopped at its iteration cap.
    pub converged: bool,
}

impl EpisodeResult {
    pub fn new(meta: EpisodeMeta) -> Self {
        Self { clustering_accuracy: None, unsupervised_accuracy: None, supervised_accuracy: None, meta, converged: true }
    }

    fn metrics(&self) -> [(&'static str, Option<f64>); 3] {
        [
            (CLUSTERING_ACCURACY, self.clustering_accuracy),
            (UNSUPERVISED_ACCURACY, self.unsupervised_accuracy),
            (SUPERVISED_ACCURACY, self.supervised_accuracy),
        ]
    }

    /// Merges the accuracies present in `other` into `self`.
    pub fn merge(mut self, other: &EpisodeResult) -> Self {
        self.clustering_accuracy = self.clustering_accuracy.or(other.clustering_accuracy);
        self.unsupervised_accuracy = self.unsupervised_accuracy.or(other.unsupervised_accuracy);
        self.supervised_accuracy = self.supervised_accuracy.or(other.supervised_accuracy);
        self.converged &= other.converged;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when n = 1.
    pub std: f64,
    /// `1.96 * std / sqrt(n)`
    pub ci95: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            bail!(Argument, "cannot summarize an empty sample");
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
        } else {
            0.0
        };
        Ok(Self { mean, std, ci95: Z95 * std / sqrt(n as f64), n })
    }

    /// A single observation has no spread estimate.
    pub fn is_degenerate(&self) -> bool {
        self.n < 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: BTreeMap<String, MetricSummary>,
    pub episodes: usize,
    pub non_converged_episodes: usize,
    /// Architecture fingerprint of the embedding that produced the report.
    pub fingerprint: Option<String>,
    pub way: Option<usize>,
    pub cscc: Option<Cscc>,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.get(name)
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = Some(fingerprint.into());
        self
    }
}

/// Per-metric mean, sample std and 95% half-width, reduced in input order.
pub fn aggregate(results: &[EpisodeResult]) -> Result<EvalReport> {
    if results.is_empty() {
        bail!(Argument, "no episode results to aggregate");
    }
    let mut metrics = BTreeMap::new();
    for name in [CLUSTERING_ACCURACY, UNSUPERVISED_ACCURACY, SUPERVISED_ACCURACY] {
        let values: Vec<f64> = results
            .iter()
            .filter_map(|r| r.metrics().into_iter().find(|(m, _)| *m == name).and_then(|(_, v)| v))
            .collect();
        if !values.is_empty() {
            metrics.insert(String::from(name), MetricSummary::from_values(&values)?);
        }
    }
    let first_way = results[0].meta.way;
    let way = results.iter().all(|r| r.meta.way == first_way).then_some(first_way);
    Ok(EvalReport {
        metrics,
        episodes: results.len(),
        non_converged_episodes: results.iter().filter(|r| !r.converged).count(),
        fingerprint: None,
        way,
        cscc: None,
    })
}

/// Approximate class semantics consistency: unsupervised over supervised accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cscc {
    pub value: f64,
    /// First-order propagated half-width: `r * sqrt((ci_u / u)^2 + (ci_s / s)^2)`.
    pub ci95: f64,
    pub unsupervised_mean: f64,
    pub supervised_mean: f64,
    /// Supervised accuracy at or below chance (`1 / way`); the ratio is not meaningful.
    pub below_chance: bool,
}

pub fn cscc_from_summaries(unsup: &MetricSummary, sup: &MetricSummary, way: Option<usize>) -> Result<Cscc> {
    if !(sup.mean > 0.0) {
        bail!(Argument, "supervised accuracy must be > 0, got {}", sup.mean);
    }
    let value = unsup.mean / sup.mean;
    let rel_u = if unsup.mean > 0.0 { unsup.ci95 / unsup.mean } else { 0.0 };
    let rel_s = sup.ci95 / sup.mean;
    let below_chance = way.is_some_and(|k| k > 0 && sup.mean <= 1.0 / k as f64);
    Ok(Cscc {
        value,
        ci95: value * sqrt(rel_u * rel_u + rel_s * rel_s),
        unsupervised_mean: unsup.mean,
        supervised_mean: sup.mean,
        below_chance,
    })
}

/// Consistency ratio of two reports produced by the same architecture.
pub fn cscc(unsup: &EvalReport, sup: &EvalReport) -> Result<Cscc> {
    match (&unsup.fingerprint, &sup.fingerprint) {
        (Some(a), Some(b)) if a == b => {}
        (a, b) => bail!(
            Argument,
            "architecture fingerprint mismatch (unsupervised {:?}, supervised {:?}); both reports must come from the same architecture",
            a,
            b
        ),
    }
    let u = unsup
        .metric(UNSUPERVISED_ACCURACY)
        .ok_or_else(|| crate::Error::Argument("unsupervised report has no unsupervised_accuracy".into()))?;
    let s = sup
        .metric(SUPERVISED_ACCURACY)
        .ok_or_else(|| crate::Error::Argument("supervised report has no supervised_accuracy".into()))?;
    cscc_from_summaries(u, s, sup.way.or(unsup.way))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn meta(way: usize) -> EpisodeMeta {
        EpisodeMeta { index: 0, way, shot: 1, seed: 0, semantic_attribute: None }
    }

    fn results(values: &[f64]) -> Vec<EpisodeResult> {
        values
            .iter()
            .map(|&v| EpisodeResult { supervised_accuracy: Some(v), ..EpisodeResult::new(meta(5)) })
            .collect()
    }

    fn summary(mean: f64, ci95: f64) -> MetricSummary {
        MetricSummary { mean, std: 0.0, ci95, n: 1000 }
    }

    #[test]
    fn constant_accuracies() {
        let r = aggregate(&results(&[0.8; 100])).unwrap();
        let s = r.metric(SUPERVISED_ACCURACY).unwrap();
        assert!((s.mean - 0.8).abs() < 1e-12);
        assert!(s.ci95 < 1e-12);
        assert_eq!(s.n, 100);
        assert!(r.metric(CLUSTERING_ACCURACY).is_none());
    }

    #[test]
    fn half_zeros_half_ones() {
        let mut v = vec![0.0; 500];
        v.extend(vec![1.0; 500]);
        let s = *aggregate(&results(&v)).unwrap().metric(SUPERVISED_ACCURACY).unwrap();
        // closed form: sum of squares 1000 * 0.25 over n - 1
        let std = (250.0f64 / 999.0).sqrt();
        assert_eq!(s.mean, 0.5);
        assert!((s.std - std).abs() < 1e-12);
        assert!((s.std - 0.50025).abs() < 1e-5);
        assert!((s.ci95 - 1.96 * std / 1000f64.sqrt()).abs() < 1e-12);
        assert!((s.ci95 - 0.0310).abs() < 1e-4);
    }

    #[test]
    fn single_episode_is_degenerate() {
        let s = *aggregate(&results(&[0.7])).unwrap().metric(SUPERVISED_ACCURACY).unwrap();
        assert_eq!((s.mean, s.std, s.ci95), (0.7, 0.0, 0.0));
        assert!(s.is_degenerate());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn cscc_table_values() {
        let c = cscc_from_summaries(&summary(0.553, 0.005), &summary(0.687, 0.005), Some(5)).unwrap();
        assert!((c.value - 0.805).abs() < 5e-4);
        assert!((c.ci95 - 0.009).abs() < 5e-4);
        let c = cscc_from_summaries(&summary(0.991, 0.001), &summary(0.997, 0.0), Some(5)).unwrap();
        assert!((c.value - 0.994).abs() < 5e-4);
        let c = cscc_from_summaries(&summary(0.6, 0.01), &summary(0.6, 0.01), Some(5)).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(!c.below_chance);
        let c = cscc_from_summaries(&summary(0.1, 0.01), &summary(0.2, 0.01), Some(5)).unwrap();
        assert!(c.below_chance);
        assert!(cscc_from_summaries(&summary(0.1, 0.01), &summary(0.0, 0.0), Some(5)).is_err());
    }

    #[test]
    fn cscc_requires_matching_fingerprints() {
        let mut u = aggregate(&[EpisodeResult { unsupervised_accuracy: Some(0.5), ..EpisodeResult::new(meta(5)) }]).unwrap();
        let mut s = aggregate(&results(&[0.6])).unwrap();
        assert!(cscc(&u, &s).is_err());
        u = u.with_fingerprint("aa");
        s = s.with_fingerprint("bb");
        assert!(matches!(cscc(&u, &s), Err(crate::Error::Argument(_))));
        s = s.with_fingerprint("aa");
        assert!((cscc(&u, &s).unwrap().value - 0.5 / 0.6).abs() < 1e-12);
    }
}
