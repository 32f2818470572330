//! Few-shot episodes, episodic samplers and the attribute-grid generator.
//!
//! The attribute grid is the desk-scale stand-in for image datasets: every
//! sample is a combination of latent attribute values, each attribute
//! contributing a one-hot block to the feature vector. An episode picks one
//! attribute as its class semantics; whether that choice is fixed or varies
//! across episodes is what the consistency ratio should detect.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Rng};

/// Hard cap on the number of attribute-value combinations.
pub const MAX_COMBINATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
    #[default]
    Test,
}

/// Latent attribute values, `rows x cardinalities.len()`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTable {
    pub cardinalities: Vec<usize>,
    pub values: Vec<u32>,
}

impl AttributeTable {
    pub fn attribute_count(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.cardinalities.len().max(1)
    }

    pub fn value(&self, row: usize, attribute: usize) -> usize {
        self.values[row * self.cardinalities.len() + attribute] as usize
    }

    /// Labels obtained by reading one attribute as the class.
    pub fn labels_for(&self, attribute: usize) -> Vec<usize> {
        (0..self.rows()).map(|r| self.value(r, attribute)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub features: Matrix,
    /// Per-sample class; absent for synthetic data, whose classes are per-episode.
    pub labels: Option<Vec<usize>>,
    pub attributes: Option<AttributeTable>,
    pub class_count: usize,
    pub split: Split,
}

impl LabeledDataset {
    /// Labeled dataset; `class_count` is inferred as `max label + 1`.
    pub fn labeled(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        let ds = Self { features, labels: Some(labels), attributes: None, class_count, split: Split::Test };
        ds.validate()?;
        Ok(ds)
    }

    pub fn unlabeled(features: Matrix) -> Result<Self> {
        let ds = Self { features, labels: None, attributes: None, class_count: 0, split: Split::Test };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(row) = self.features.iter_rows().position(|r| r.iter().any(|x| !x.is_finite())) {
            bail!(Argument, "feature row {row} is not finite");
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.len() {
                bail!(Shape, "{} labels for {} rows", labels.len(), self.len());
            }
            let mut seen = vec![false; self.class_count];
            for (i, &y) in labels.iter().enumerate() {
                if y >= self.class_count {
                    bail!(Argument, "label {y} at row {i} out of range for {} classes", self.class_count);
                }
                seen[y] = true;
            }
            if let Some(empty) = seen.iter().position(|s| !s) {
                bail!(Argument, "class {empty} has no samples");
            }
        }
        if let Some(attrs) = &self.attributes {
            if attrs.rows() != self.len() {
                bail!(Shape, "attribute table has {} rows for {} samples", attrs.rows(), self.len());
            }
            for (a, &card) in attrs.cardinalities.iter().enumerate() {
                if (0..attrs.rows()).any(|r| attrs.value(r, a) >= card) {
                    bail!(Argument, "attribute {a} has a value outside 0..{card}");
                }
            }
        }
        Ok(())
    }
}

/// How an episode's class-defining attribute is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConsistencyMode {
    /// Always the same attribute.
    Consistent { attribute: usize },
    /// Drawn per episode with the given probabilities.
    Mixed { probabilities: Vec<f64> },
}

impl ConsistencyMode {
    pub fn uniform_mixed(attributes: usize) -> Self {
        ConsistencyMode::Mixed { probabilities: vec![1.0 / attributes as f64; attributes] }
    }

    fn validate(&self, attributes: usize) -> Result<()> {
        match self {
            ConsistencyMode::Consistent { attribute } if *attribute >= attributes => {
                bail!(Argument, "attribute {attribute} out of range for {attributes} attributes")
            }
            ConsistencyMode::Mixed { probabilities } => {
                if probabilities.len() != attributes {
                    bail!(Argument, "{} mixing probabilities for {attributes} attributes", probabilities.len());
                }
                let sum: f64 = probabilities.iter().sum();
                if probabilities.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    bail!(Argument, "mixing probabilities must be nonnegative and sum to 1 (sum {sum})");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut Rng) -> usize {
        match self {
            ConsistencyMode::Consistent { attribute } => *attribute,
            ConsistencyMode::Mixed { probabilities } => {
                let mut u: f64 = rng.random();
                for (a, p) in probabilities.iter().enumerate() {
                    if u < *p {
                        return a;
                    }
                    u -= p;
                }
                probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub cardinality: usize,
    /// Height of the one-hot block for the sample's value.
    pub signal: f64,
}

impl Attribute {
    pub fn new(cardinality: usize, signal: f64) -> Self {
        Self { cardinality, signal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub attributes: Vec<Attribute>,
    pub noise_std: f64,
    pub dim_per_value: usize,
    pub samples_per_combination: usize,
    pub consistency: ConsistencyMode,
}

impl AttributeSpec {
    pub fn combinations(&self) -> Result<usize> {
        let mut total = 1usize;
        for card in self.attributes.iter().map(|a| a.cardinality) {
            total = total.checked_mul(card).filter(|t| *t <= MAX_COMBINATIONS).ok_or_else(|| {
                crate::Error::Argument(alloc::format!("more than {MAX_COMBINATIONS} attribute combinations"))
            })?;
        }
        Ok(total)
    }

    pub fn feature_dim(&self) -> usize {
        self.attributes.iter().map(|a| a.cardinality * self.dim_per_value).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            bail!(Argument, "need at least one attribute");
        }
        for (a, &Attribute { cardinality: card, signal }) in self.attributes.iter().enumerate() {
            if card < 2 {
                bail!(Argument, "attribute {a} has cardinality {card}, need >= 2");
            }
            if !signal.is_finite() {
                bail!(Argument, "attribute {a} has non-finite signal");
            }
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            bail!(Argument, "noise_std must be > 0, got {}", self.noise_std);
        }
        if self.dim_per_value == 0 || self.samples_per_combination == 0 {
            bail!(Argument, "dim_per_value and samples_per_combination must be >= 1");
        }
        self.consistency.validate(self.attributes.len())?;
        self.combinations().map(|_| ())
    }
}

/// Enumerates every attribute combination (last attribute fastest) and draws
/// `samples_per_combination` noisy samples of each.
pub fn gen_attribute_dataset(spec: &AttributeSpec, seed: u64) -> Result<LabeledDataset> {
    spec.validate()?;
    let combos = spec.combinations()?;
    let n = combos * spec.samples_per_combination;
    let d = spec.feature_dim();
    let a_count = spec.attributes.len();
    let mut rng = stream_rng(seed, 0);
    let mut features = Vec::with_capacity(n * d);
    let mut values = Vec::with_capacity(n * a_count);
    let mut combo = vec![0usize; a_count];

    for _ in 0..combos {
        for _ in 0..spec.samples_per_combination {
            for (&Attribute { cardinality: card, signal }, &value) in spec.attributes.iter().zip(&combo) {
                for v in 0..card {
                    let mean = if v == value { signal } else { 0.0 };
                    for _ in 0..spec.dim_per_value {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        features.push(mean + spec.noise_std * z);
                    }
                }
            }
            values.extend(combo.iter().map(|&v| v as u32));
        }
        for a in (0..a_count).rev() {
            combo[a] += 1;
            if combo[a] < spec.attributes[a].cardinality {
                break;
            }
            combo[a] = 0;
        }
    }

    let ds = LabeledDataset {
        features: Matrix::new(n, d, features)?,
        labels: None,
        attributes: Some(AttributeTable { cardinalities: spec.attributes.iter().map(|a| a.cardinality).collect(), values }),
        class_count: 0,
        split: Split::Train,
    };
    ds.validate()?;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeShape {
    pub way: usize,
    pub shot: usize,
    pub query: usize,
}

impl EpisodeShape {
    pub fn new(way: usize, shot: usize, query: usize) -> Self {
        Self { way, shot, query }
    }

    fn validate(&self) -> Result<()> {
        if self.way == 0 || self.shot == 0 {
            bail!(Argument, "way and shot must be >= 1 (way={}, shot={})", self.way, self.shot);
        }
        Ok(())
    }
}

/// Per-episode shape drawn uniformly from inclusive way and shot ranges.
/// A fixed shape is the range `[way, way] x [shot, shot]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeRange {
    pub way: (usize, usize),
    pub shot: (usize, usize),
    pub query: usize,
}

impl ShapeRange {
    pub fn fixed(shape: EpisodeShape) -> Self {
        Self { way: (shape.way, shape.way), shot: (shape.shot, shape.shot), query: shape.query }
    }

    pub fn is_fixed(&self) -> bool {
        self.way.0 == self.way.1 && self.shot.0 == self.shot.1
    }

    pub fn min_shape(&self) -> EpisodeShape {
        EpisodeShape::new(self.way.0, self.shot.0, self.query)
    }

    pub fn max_shape(&self) -> EpisodeShape {
        EpisodeShape::new(self.way.1, self.shot.1, self.query)
    }

    fn validate(&self) -> Result<()> {
        self.min_shape().validate()?;
        if self.way.0 > self.way.1 || self.shot.0 > self.shot.1 {
            bail!(Argument, "empty shape range: way {:?}, shot {:?}", self.way, self.shot);
        }
        Ok(())
    }
}

/// One few-shot task. Support and query rows are class-major: class 0's rows
/// first, then class 1's, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub support_x: Matrix,
    pub support_y: Vec<usize>,
    pub query_x: Matrix,
    pub query_y: Vec<usize>,
    pub shape: EpisodeShape,
    pub semantic_attribute: Option<usize>,
    /// Dataset row of each support / query sample.
    pub support_index: Vec<usize>,
    pub query_index: Vec<usize>,
    /// Seed the episode was drawn with; reused for clustering initialization.
    pub seed: u64,
}

impl Episode {
    pub fn way(&self) -> usize {
        self.shape.way
    }
}

const SHAPE_STREAM: u64 = 0x5ea9e;

/// Draws episodes from a dataset.
///
/// With an attribute table and a consistency mode, the class semantics are
/// drawn per episode; otherwise the dataset labels are the classes.
#[derive(Debug, Clone)]
pub struct EpisodeSampler<'a> {
    dataset: &'a LabeledDataset,
    range: ShapeRange,
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    /// rows grouped by class
    Labels(Vec<Vec<usize>>),
    /// rows grouped by [attribute][value]
    Attributes { mode: ConsistencyMode, groups: Vec<Vec<Vec<usize>>> },
}

impl<'a> EpisodeSampler<'a> {
    pub fn new(dataset: &'a LabeledDataset, shape: EpisodeShape, mode: Option<&ConsistencyMode>) -> Result<Self> {
        Self::with_range(dataset, ShapeRange::fixed(shape), mode)
    }

    /// Sampler whose episodes draw their way and shot from `range`; the
    /// dataset must support the largest shape.
    pub fn with_range(dataset: &'a LabeledDataset, range: ShapeRange, mode: Option<&ConsistencyMode>) -> Result<Self> {
        range.validate()?;
        let shape = range.max_shape();
        let per_class = shape.shot + shape.query;
        let source = match (&dataset.attributes, mode) {
            (Some(attrs), Some(mode)) => {
                mode.validate(attrs.attribute_count())?;
                let mut groups = Vec::with_capacity(attrs.attribute_count());
                for (a, &card) in attrs.cardinalities.iter().enumerate() {
                    let mut by_value = vec![Vec::new(); card];
                    for r in 0..attrs.rows() {
                        by_value[attrs.value(r, a)].push(r);
                    }
                    let usable = match mode {
                        ConsistencyMode::Consistent { attribute } => *attribute == a,
                        ConsistencyMode::Mixed { probabilities } => probabilities[a] > 0.0,
                    };
                    if usable {
                        if card < shape.way {
                            bail!(Argument, "attribute {a} has {card} values, fewer than way={}", shape.way);
                        }
                        check_counts(&by_value, per_class, &alloc::format!("attribute {a} value"))?;
                    }
                    groups.push(by_value);
                }
                Source::Attributes { mode: mode.clone(), groups }
            }
            (None, Some(_)) => bail!(Argument, "consistency mode given but the dataset has no attribute table"),
            (_, None) => {
                let labels = dataset
                    .labels
                    .as_ref()
                    .ok_or_else(|| crate::Error::Argument("dataset has no labels; give a consistency mode".into()))?;
                let mut by_class = vec![Vec::new(); dataset.class_count];
                for (r, &y) in labels.iter().enumerate() {
                    by_class[y].push(r);
                }
                if by_class.len() < shape.way {
                    bail!(Argument, "dataset has {} classes, fewer than way={}", by_class.len(), shape.way);
                }
                check_counts(&by_class, per_class, "class")?;
                Source::Labels(by_class)
            }
        };
        Ok(Self { dataset, range, source })
    }

    /// The fixed shape, or the smallest one of a range.
    pub fn shape(&self) -> EpisodeShape {
        self.range.min_shape()
    }

    pub fn range(&self) -> ShapeRange {
        self.range
    }

    pub fn dataset(&self) -> &LabeledDataset {
        self.dataset
    }

    /// Episode `index` of the run keyed by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Episode {
        let mut rng = stream_rng(seed, index);
        let episode_seed = crate::rng::derive_seed(seed, index);
        let (groups, semantic) = match &self.source {
            Source::Labels(g) => (g, None),
            Source::Attributes { mode, groups } => {
                let a = mode.draw(&mut rng);
                (&groups[a], Some(a))
            }
        };
        let shape = if self.range.is_fixed() {
            self.range.min_shape()
        } else {
            // own stream, so fixed-shape runs draw exactly as before
            let mut srng = stream_rng(episode_seed, SHAPE_STREAM);
            EpisodeShape::new(
                srng.random_range(self.range.way.0..=self.range.way.1),
                srng.random_range(self.range.shot.0..=self.range.shot.1),
                self.range.query,
            )
        };
        let classes = index::sample(&mut rng, groups.len(), shape.way).into_vec();
        let mut support_index = Vec::with_capacity(shape.way * shape.shot);
        let mut query_index = Vec::with_capacity(shape.way * shape.query);
        for &c in &classes {
            let members = &groups[c];
            let picks = index::sample(&mut rng, members.len(), shape.shot + shape.query).into_vec();
            support_index.extend(picks[..shape.shot].iter().map(|&p| members[p]));
            query_index.extend(picks[shape.shot..].iter().map(|&p| members[p]));
        }
        let support_y = (0..shape.way).flat_map(|c| core::iter::repeat_n(c, shape.shot)).collect();
        let query_y = (0..shape.way).flat_map(|c| core::iter::repeat_n(c, shape.query)).collect();
        Episode {
            support_x: self.dataset.features.select_rows(&support_index),
            support_y,
            query_x: self.dataset.features.select_rows(&query_index),
            query_y,
            shape,
            semantic_attribute: semantic,
            support_index,
            query_index,
            seed: episode_seed,
        }
    }
}

fn check_counts(groups: &[Vec<usize>], needed: usize, what: &str) -> Result<()> {
    let short: Vec<String> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.len() < needed)
        .map(|(c, g)| alloc::format!("{what} {c} has {} samples", g.len()))
        .collect();
    if !short.is_empty() {
        bail!(Argument, "need {needed} samples per class (shot + query): {}", short.join(", "));
    }
    Ok(())
}

/// Convenience wrapper: builds a sampler and draws episode 0 of `seed`.
pub fn sample_episode(
    dataset: &LabeledDataset,
    mode: Option<&ConsistencyMode>,
    shape: EpisodeShape,
    seed: u64,
) -> Result<Episode> {
    Ok(EpisodeSampler::new(dataset, shape, mode)?.sample(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assign::{nearest_centroid, prototypes};
    use crate::math::squared_distance;
    use proptest::prelude::*;

    fn spec(attrs: &[(usize, f64)], noise: f64, spc: usize, mode: ConsistencyMode) -> AttributeSpec {
        AttributeSpec {
            attributes: attrs.iter().map(|&(c, s)| Attribute::new(c, s)).collect(),
            noise_std: noise,
            dim_per_value: 1,
            samples_per_combination: spc,
            consistency: mode,
        }
    }

    #[test]
    fn combination_counting() {
        let s = spec(&[(3, 1.0), (3, 1.0)], 0.1, 4, ConsistencyMode::Consistent { attribute: 0 });
        let ds = gen_attribute_dataset(&s, 1).unwrap();
        assert_eq!(ds.len(), 36);
        assert_eq!(ds.dim(), 6);
        assert!(ds.labels.is_none());
        let t = ds.attributes.as_ref().unwrap();
        assert_eq!(t.rows(), 36);
    }

    #[test]
    fn noise_free_limit() {
        let s = spec(&[(2, 3.0), (3, 1.0)], 1e-9, 3, ConsistencyMode::Consistent { attribute: 0 });
        let ds = gen_attribute_dataset(&s, 2).unwrap();
        let t = ds.attributes.as_ref().unwrap();
        for i in 0..ds.len() {
            for j in 0..ds.len() {
                let same = (0..2).all(|a| t.value(i, a) == t.value(j, a));
                if same {
                    assert!(squared_distance(ds.features.row(i), ds.features.row(j)).sqrt() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let s = spec(&[(3, 2.0), (2, 1.0)], 0.5, 2, ConsistencyMode::uniform_mixed(2));
        let a = gen_attribute_dataset(&s, 9).unwrap();
        let b = gen_attribute_dataset(&s, 9).unwrap();
        assert_eq!(a, b);
        let c = gen_attribute_dataset(&s, 10).unwrap();
        assert_ne!(a.features, c.features);
    }

    #[test]
    fn generator_rejects_bad_specs() {
        let mode = ConsistencyMode::Consistent { attribute: 0 };
        assert!(gen_attribute_dataset(&spec(&[(1, 1.0)], 1.0, 1, mode.clone()), 0).is_err());
        assert!(gen_attribute_dataset(&spec(&[(2, 1.0)], 0.0, 1, mode.clone()), 0).is_err());
        assert!(gen_attribute_dataset(&spec(&[(1000, 1.0), (1001, 1.0)], 1.0, 1, mode), 0).is_err());
        let bad_mix = ConsistencyMode::Mixed { probabilities: vec![0.5, 0.6] };
        assert!(gen_attribute_dataset(&spec(&[(2, 1.0), (2, 1.0)], 1.0, 1, bad_mix), 0).is_err());
    }

    fn labeled(classes: usize, per: usize) -> LabeledDataset {
        let n = classes * per;
        let features = Matrix::new(n, 2, (0..2 * n).map(|v| v as f64).collect()).unwrap();
        LabeledDataset::labeled(features, (0..n).map(|i| i % classes).collect()).unwrap()
    }

    #[test]
    fn mini_imagenet_shape() {
        let ds = labeled(20, 30);
        let ep = sample_episode(&ds, None, EpisodeShape::new(5, 5, 15), 3).unwrap();
        assert_eq!(ep.support_x.rows(), 25);
        assert_eq!(ep.query_x.rows(), 75);
        assert_eq!(ep.support_y.len(), 25);
        assert_eq!(ep.query_y.len(), 75);
    }

    #[test]
    fn full_coverage_episode() {
        let ds = labeled(4, 5);
        let ep = sample_episode(&ds, None, EpisodeShape::new(4, 2, 3), 0).unwrap();
        let mut all: Vec<usize> = ep.support_index.iter().chain(&ep.query_index).copied().collect();
        all.sort();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn consistent_mode_is_forced() {
        let s = spec(&[(5, 3.0), (5, 3.0), (5, 3.0)], 1.0, 2, ConsistencyMode::Consistent { attribute: 0 });
        let ds = gen_attribute_dataset(&s, 0).unwrap();
        let sampler = EpisodeSampler::new(&ds, EpisodeShape::new(5, 3, 4), Some(&s.consistency)).unwrap();
        for i in 0..1000 {
            assert_eq!(sampler.sample(1, i).semantic_attribute, Some(0));
        }
    }

    #[test]
    fn mixed_mode_visits_all_attributes() {
        let s = spec(&[(3, 3.0), (3, 3.0), (3, 3.0)], 1.0, 2, ConsistencyMode::uniform_mixed(3));
        let ds = gen_attribute_dataset(&s, 0).unwrap();
        let sampler = EpisodeSampler::new(&ds, EpisodeShape::new(3, 2, 2), Some(&s.consistency)).unwrap();
        let mut counts = [0; 3];
        for i in 0..300 {
            counts[sampler.sample(4, i).semantic_attribute.unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| c > 60), "{counts:?}");
    }

    #[test]
    fn synthetic_labels_follow_semantic_attribute() {
        let s = spec(&[(4, 3.0), (3, 3.0)], 1.0, 3, ConsistencyMode::uniform_mixed(2));
        let ds = gen_attribute_dataset(&s, 5).unwrap();
        let t = ds.attributes.as_ref().unwrap();
        let sampler = EpisodeSampler::new(&ds, EpisodeShape::new(3, 2, 3), Some(&s.consistency)).unwrap();
        for i in 0..50 {
            let ep = sampler.sample(2, i);
            let a = ep.semantic_attribute.unwrap();
            // rows with the same label share the attribute value, different labels differ
            for (x, &ri) in ep.support_index.iter().enumerate() {
                for (y, &rj) in ep.support_index.iter().enumerate() {
                    let same_value = t.value(ri, a) == t.value(rj, a);
                    assert_eq!(same_value, ep.support_y[x] == ep.support_y[y]);
                }
            }
        }
    }

    #[test]
    fn insufficient_samples_reported() {
        let ds = labeled(3, 4);
        let err = EpisodeSampler::new(&ds, EpisodeShape::new(3, 3, 3), None).unwrap_err();
        assert!(alloc::format!("{err}").contains("has 4 samples"));
        assert!(EpisodeSampler::new(&ds, EpisodeShape::new(4, 1, 1), None).is_err());
        let s = spec(&[(3, 1.0)], 1.0, 10, ConsistencyMode::Consistent { attribute: 0 });
        let syn = gen_attribute_dataset(&s, 0).unwrap();
        assert!(EpisodeSampler::new(&syn, EpisodeShape::new(4, 1, 1), Some(&s.consistency)).is_err());
        assert!(EpisodeSampler::new(&syn, EpisodeShape::new(2, 1, 1), None).is_err());
    }

    #[test]
    fn shape_ranges() {
        let mode = ConsistencyMode::Consistent { attribute: 0 };
        let ds = gen_attribute_dataset(&spec(&[(6, 3.0), (2, 1.0)], 1.0, 5, mode.clone()), 4).unwrap();
        let range = ShapeRange { way: (2, 5), shot: (1, 3), query: 2 };
        let s = EpisodeSampler::with_range(&ds, range, Some(&mode)).unwrap();
        let (mut ways, mut shots) = (vec![0; 6], vec![0; 4]);
        for i in 0..300 {
            let ep = s.sample(8, i);
            assert_eq!(ep.support_x.rows(), ep.shape.way * ep.shape.shot);
            assert_eq!(ep.query_y.len(), ep.shape.way * 2);
            ways[ep.shape.way] += 1;
            shots[ep.shape.shot] += 1;
            assert_eq!(ep, s.sample(8, i));
        }
        assert!(ways[2..=5].iter().all(|&c| c > 0) && ways[..2].iter().all(|&c| c == 0), "{ways:?}");
        assert!(shots[1..=3].iter().all(|&c| c > 0), "{shots:?}");

        // a degenerate range is the fixed sampler
        let fixed = EpisodeSampler::new(&ds, EpisodeShape::new(3, 2, 2), Some(&mode)).unwrap();
        let same = EpisodeSampler::with_range(&ds, ShapeRange { way: (3, 3), shot: (2, 2), query: 2 }, Some(&mode)).unwrap();
        assert_eq!(fixed.sample(1, 7), same.sample(1, 7));

        // 6 values x 10 samples: shot 9 + query 2 does not fit
        assert!(EpisodeSampler::with_range(&ds, ShapeRange { way: (2, 3), shot: (1, 9), query: 2 }, Some(&mode)).is_err());
        assert!(EpisodeSampler::with_range(&ds, ShapeRange { way: (4, 3), shot: (1, 1), query: 2 }, Some(&mode)).is_err());
    }

    #[test]
    fn separable_synthetic_nearest_mean() {
        let s = spec(&[(5, 10.0), (4, 10.0)], 1.0, 10, ConsistencyMode::uniform_mixed(2));
        let ds = gen_attribute_dataset(&s, 13).unwrap();
        let sampler = EpisodeSampler::new(&ds, EpisodeShape::new(4, 5, 10), Some(&s.consistency)).unwrap();
        let mut correct = 0;
        let mut total = 0;
        for i in 0..100 {
            let ep = sampler.sample(0, i);
            let mu = prototypes(&ep.support_x, &ep.support_y, 4).unwrap();
            let pred = nearest_centroid(&ep.query_x, &mu).unwrap();
            correct += pred.iter().zip(&ep.query_y).filter(|(a, b)| a == b).count();
            total += pred.len();
        }
        assert!(correct as f64 / total as f64 >= 0.99);
    }

    proptest! {
        #[test]
        fn episodes_are_balanced_disjoint_and_reproducible(
            way in 1usize..5, shot in 1usize..4, query in 0usize..4, seed in any::<u64>(), idx in 0u64..1000,
        ) {
            let ds = labeled(6, 8);
            let sampler = EpisodeSampler::new(&ds, EpisodeShape::new(way, shot, query), None).unwrap();
            let ep = sampler.sample(seed, idx);
            for c in 0..way {
                prop_assert_eq!(ep.support_y.iter().filter(|&&y| y == c).count(), shot);
                prop_assert_eq!(ep.query_y.iter().filter(|&&y| y == c).count(), query);
            }
            for s in &ep.support_index {
                prop_assert!(!ep.query_index.contains(s));
            }
            let labels = ds.labels.as_ref().unwrap();
            for (k, &r) in ep.support_index.iter().enumerate() {
                let same: Vec<usize> = ep.support_index.iter().enumerate().filter(|(_, &q)| labels[q] == labels[r]).map(|(j, _)| j).collect();
                prop_assert!(same.iter().all(|&j| ep.support_y[j] == ep.support_y[k]));
            }
            prop_assert_eq!(&ep, &sampler.sample(seed, idx));
        }
    }
}
