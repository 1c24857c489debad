//! Domain types and game preparation shared by every engine.

use std::ops::{AddAssign, Div};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::count::dyadic_to_f64;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub id: usize,
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    /// Validates ids (`0..n` in order), a common feature dimension and labels
    /// below `num_classes`.
    pub fn new(points: Vec<LabeledPoint>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "num_classes must be at least 2, got {num_classes}"
            )));
        }
        let dim = points.first().map_or(0, |p| p.features.len());
        for (i, p) in points.iter().enumerate() {
            if p.id != i {
                return Err(Error::InvalidParameter(format!(
                    "point ids must be 0..n in order; position {i} has id {}",
                    p.id
                )));
            }
            if p.features.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "point {i} has {} features, expected {dim}",
                    p.features.len()
                )));
            }
            if p.label >= num_classes {
                return Err(Error::InvalidParameter(format!(
                    "point {i} has label {} but the dataset has {num_classes} classes",
                    p.label
                )));
            }
        }
        Ok(Self {
            points,
            dim,
            num_classes,
        })
    }

    /// Builds a dataset with ids in row order; `num_classes` is
    /// `max(2, max_label + 1)`.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        let num_classes = labels.iter().copied().max().map_or(2, |m| (m + 1).max(2));
        let points = features
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(id, (features, label))| LabeledPoint {
                id,
                features,
                label,
            })
            .collect();
        Self::new(points, num_classes)
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.label).collect()
    }

    /// Same points with new labels.
    pub fn with_labels(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: labels.len(),
            });
        }
        let points = self
            .points
            .iter()
            .zip(labels)
            .map(|(p, &label)| LabeledPoint { label, ..p.clone() })
            .collect();
        Self::new(points, self.num_classes)
    }

    /// A new dataset made of the listed points, re-numbered `0..ids.len()`.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let points = ids
            .iter()
            .enumerate()
            .map(|(new_id, &id)| {
                self.points
                    .get(id)
                    .map(|p| LabeledPoint {
                        id: new_id,
                        ..p.clone()
                    })
                    .ok_or_else(|| Error::InvalidParameter(format!("no point with id {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, self.num_classes)
    }

    fn check_finite(&self) -> Result<()> {
        for p in &self.points {
            if p.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("features of point {}", p.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WeightScheme {
    Uniform,
    /// `1 / (d + epsilon)`
    InverseDistance {
        epsilon: f64,
    },
    /// `exp(-d^2 / (2 sigma^2))`
    Rbf {
        sigma: f64,
    },
}

impl WeightScheme {
    pub fn raw_weight(&self, distance: f64) -> f64 {
        match *self {
            WeightScheme::Uniform => 1.0,
            WeightScheme::InverseDistance { epsilon } => 1.0 / (distance + epsilon),
            WeightScheme::Rbf { sigma } => (-(distance * distance) / (2.0 * sigma * sigma)).exp(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, WeightScheme::Uniform)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::Uniform => Ok(()),
            WeightScheme::InverseDistance { epsilon } if epsilon > 0.0 && epsilon.is_finite() => {
                Ok(())
            }
            WeightScheme::Rbf { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            other => Err(Error::InvalidParameter(format!(
                "weight scheme parameter must be positive and finite: {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Manhattan,
    /// `1 - cosine similarity`; a zero vector is at distance 1 from everything.
    Cosine,
}

impl DistanceMetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            DistanceMetric::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na * nb)
                }
            }
        }
    }
}

/// How equal distances are ordered. Only one policy exists: ascending id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    #[default]
    ByIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub k: usize,
    pub weight_scheme: WeightScheme,
    pub distance_metric: DistanceMetric,
    /// Discretisation resolution: weights map onto `2^bits` levels.
    pub bits: u32,
    pub tie_policy: TiePolicy,
}

impl GameSpec {
    pub const DEFAULT_BITS: u32 = 7;
    pub const MAX_BITS: u32 = 24;

    pub fn unweighted(k: usize) -> Self {
        Self {
            k,
            weight_scheme: WeightScheme::Uniform,
            distance_metric: DistanceMetric::Euclidean,
            bits: Self::DEFAULT_BITS,
            tie_policy: TiePolicy::ByIndex,
        }
    }

    pub fn weighted(k: usize, weight_scheme: WeightScheme) -> Self {
        Self {
            weight_scheme,
            ..Self::unweighted(k)
        }
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidParameter(format!(
                "k must lie in [1, n] = [1, {n}], got {}",
                self.k
            )));
        }
        if self.bits == 0 || self.bits > Self::MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "bits must lie in [1, {}], got {}",
                Self::MAX_BITS,
                self.bits
            )));
        }
        self.weight_scheme.validate()
    }
}

/// A binary kNN utility game for one test point.
///
/// Positions `0..n` follow non-decreasing distance to the test point;
/// `order[pos]` is the original id of the point at `pos`, and
/// `signed_weights[pos]` is its discretised weight, negated when its label
/// disagrees with the test label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedGame {
    pub order: Vec<usize>,
    pub signed_weights: Vec<i64>,
    pub k: usize,
    /// Upper bound on the magnitude of any top-k weight sum.
    pub max_weight: i64,
    pub test_label: usize,
}

impl PreparedGame {
    /// A game over points already in distance order (`order` is the
    /// identity). `max_weight` is the sum of the `k` largest magnitudes.
    pub fn from_signed_weights(signed_weights: Vec<i64>, k: usize) -> Result<Self> {
        let n = signed_weights.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "k must lie in [1, {n}], got {k}"
            )));
        }
        let max_weight = top_k_magnitude_sum(&signed_weights, k);
        Ok(Self {
            order: (0..n).collect(),
            signed_weights,
            k,
            max_weight,
            test_label: 0,
        })
    }

    /// Unit-weight game from label agreement (`true` = same label as the
    /// test point), with the unweighted bound `W = k + 1`.
    pub fn unweighted_from_agreement(agree: &[bool], k: usize) -> Result<Self> {
        let weights = agree.iter().map(|&a| if a { 1 } else { -1 }).collect();
        let mut game = Self::from_signed_weights(weights, k)?;
        game.max_weight = k as i64 + 1;
        Ok(game)
    }

    pub fn n(&self) -> usize {
        self.signed_weights.len()
    }

    /// True when every weight is `+1`, `-1` or `0` (zeros come from
    /// multi-class masking).
    pub fn is_unit_weighted(&self) -> bool {
        self.signed_weights.iter().all(|w| w.abs() <= 1)
    }

    pub fn has_monotone_magnitudes(&self) -> bool {
        self.signed_weights
            .windows(2)
            .all(|w| w[0].abs() >= w[1].abs())
    }

    /// Scatters position-indexed values back to original id order.
    pub fn to_id_order<T: Clone>(&self, by_position: Vec<T>) -> Vec<T> {
        let mut out = by_position.clone();
        for (pos, v) in by_position.into_iter().enumerate() {
            out[self.order[pos]] = v;
        }
        out
    }
}

fn top_k_magnitude_sum(weights: &[i64], k: usize) -> i64 {
    let mut mags: Vec<i64> = weights.iter().map(|w| w.abs()).collect();
    mags.sort_unstable_by(|a, b| b.cmp(a));
    mags.iter().take(k).sum()
}

/// Maps raw non-negative weights onto `2^bits` evenly spaced levels of
/// `[0, max(raw)]`, rounding to the nearest level.
pub fn discretize_weights(raw: &[f64], bits: u32) -> Vec<i64> {
    let top = ((1u64 << bits) - 1) as f64;
    let max = raw.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return vec![0; raw.len()];
    }
    raw.iter()
        .map(|&r| ((r / max) * top).round().clamp(0.0, top) as i64)
        .collect()
}

/// Indices sorted by non-decreasing distance, ties by ascending id.
fn sorted_by_distance(distances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order
}

fn distances_to(
    train: &Dataset,
    test_features: &[f64],
    metric: DistanceMetric,
) -> Result<Vec<f64>> {
    if test_features.len() != train.dim() {
        return Err(Error::LengthMismatch {
            expected: train.dim(),
            actual: test_features.len(),
        });
    }
    if test_features.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("test point features".into()));
    }
    let distances: Vec<f64> = train
        .points()
        .iter()
        .map(|p| metric.distance(&p.features, test_features))
        .collect();
    if let Some(i) = distances.iter().position(|d| !d.is_finite()) {
        return Err(Error::NonFinite(format!("distance to point {i}")));
    }
    Ok(distances)
}

/// Game preparation without the binary-label check; signs follow label
/// agreement with `test_label`.
fn prepare_signed(
    train: &Dataset,
    test_features: &[f64],
    test_label: usize,
    spec: &GameSpec,
) -> Result<PreparedGame> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    spec.validate_for(train.len())?;
    train.check_finite()?;
    let distances = distances_to(train, test_features, spec.distance_metric)?;
    let order = sorted_by_distance(&distances);
    let magnitudes = if spec.weight_scheme.is_uniform() {
        vec![1; order.len()]
    } else {
        let raw: Vec<f64> = order
            .iter()
            .map(|&id| spec.weight_scheme.raw_weight(distances[id]))
            .collect();
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NonFinite("raw weights".into()));
        }
        discretize_weights(&raw, spec.bits)
    };
    let points = train.points();
    let signed_weights: Vec<i64> = order
        .iter()
        .zip(&magnitudes)
        .map(|(&id, &m)| {
            if points[id].label == test_label {
                m
            } else {
                -m
            }
        })
        .collect();
    let max_weight = if spec.weight_scheme.is_uniform() {
        spec.k as i64 + 1
    } else {
        top_k_magnitude_sum(&signed_weights, spec.k)
    };
    Ok(PreparedGame {
        order,
        signed_weights,
        k: spec.k,
        max_weight,
        test_label,
    })
}

/// Builds the binary game induced by one labelled test point.
pub fn prepare_game(
    train: &Dataset,
    test_features: &[f64],
    test_label: usize,
    spec: &GameSpec,
) -> Result<PreparedGame> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.num_classes() != 2 {
        return Err(Error::NotBinary(train.num_classes()));
    }
    if test_label >= 2 {
        return Err(Error::InvalidParameter(format!(
            "test label {test_label} is not a class of a binary dataset"
        )));
    }
    prepare_signed(train, test_features, test_label, spec)
}

/// One-vs-one subproblem of a multi-class game: the test class against
/// `negative_class`, with points of every other class weighted zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySubgame {
    pub base: PreparedGame,
    pub negative_class: usize,
    /// Indexed by game position.
    pub zero_mask: Vec<bool>,
}

impl BinarySubgame {
    /// The subgame as a plain signed game, ready for any engine.
    pub fn game(&self) -> PreparedGame {
        let mut game = self.base.clone();
        for (w, &masked) in game.signed_weights.iter_mut().zip(&self.zero_mask) {
            if masked {
                *w = 0;
            }
        }
        game
    }
}

/// Splits a (possibly multi-class) game into `|Y| - 1` binary subgames, one
/// per class other than the test label. Per-point values of the multi-class
/// game are the mean of the subgame values.
pub fn decompose_multiclass(
    train: &Dataset,
    test_features: &[f64],
    test_label: usize,
    spec: &GameSpec,
) -> Result<Vec<BinarySubgame>> {
    let classes = train.num_classes();
    if classes < 2 {
        return Err(Error::InvalidParameter(format!(
            "multi-class decomposition needs at least 2 classes, got {classes}"
        )));
    }
    if test_label >= classes {
        return Err(Error::InvalidParameter(format!(
            "test label {test_label} outside the {classes} classes of the dataset"
        )));
    }
    let base = prepare_signed(train, test_features, test_label, spec)?;
    let points = train.points();
    Ok((0..classes)
        .filter(|&c| c != test_label)
        .map(|c| {
            let zero_mask = base
                .order
                .iter()
                .map(|&id| {
                    let y = points[id].label;
                    y != test_label && y != c
                })
                .collect();
            BinarySubgame {
                base: base.clone(),
                negative_class: c,
                zero_mask,
            }
        })
        .collect())
}

/// Exact per-point values `numerators[id] / 2^denominator_log2`, indexed by
/// original id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactValueVector {
    pub numerators: Vec<BigInt>,
    pub denominator_log2: u64,
}

impl ExactValueVector {
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|num| dyadic_to_f64(num, self.denominator_log2))
            .collect()
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        let den = BigInt::from(BigUint::from(1u8) << self.denominator_log2);
        self.numerators
            .iter()
            .map(|num| BigRational::new(num.clone(), den.clone()))
            .collect()
    }

    /// Mean of several exact vectors over the same points (e.g. the subgames
    /// of a multi-class game, or many test points).
    pub fn mean(vectors: &[ExactValueVector]) -> Result<Vec<BigRational>> {
        let (sums, log2) = Self::sum(vectors)?;
        let den = BigInt::from(BigUint::from(1u8) << log2) * BigInt::from(vectors.len());
        Ok(sums
            .into_iter()
            .map(|s| BigRational::new(s, den.clone()))
            .collect())
    }

    /// Unreduced element-wise sum over the largest common denominator
    /// `2^log2`, returned as `(numerators, log2)`.
    pub fn sum(vectors: &[ExactValueVector]) -> Result<(Vec<BigInt>, u64)> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("cannot average zero vectors".into()))?;
        let n = first.len();
        let log2 = vectors
            .iter()
            .map(|v| v.denominator_log2)
            .max()
            .unwrap_or(0);
        let mut sums = vec![BigInt::zero(); n];
        for v in vectors {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
            let lift = log2 - v.denominator_log2;
            for (s, num) in sums.iter_mut().zip(&v.numerators) {
                *s += num << lift;
            }
        }
        Ok((sums, log2))
    }
}

/// Element-wise arithmetic mean of per-test-point value vectors.
pub fn average_over_tests<T>(per_test: &[Vec<T>]) -> Result<Vec<T>>
where
    T: Clone + Zero + AddAssign + Div<Output = T> + FromPrimitive,
{
    let first = per_test
        .first()
        .ok_or_else(|| Error::InvalidParameter("no test points to average".into()))?;
    let mut acc = vec![T::zero(); first.len()];
    for v in per_test {
        if v.len() != acc.len() {
            return Err(Error::LengthMismatch {
                expected: acc.len(),
                actual: v.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x.clone();
        }
    }
    let count = T::from_usize(per_test.len())
        .ok_or_else(|| Error::InvalidParameter("test count not representable".into()))?;
    Ok(acc.into_iter().map(|a| a / count.clone()).collect())
}

/// Precomputed neighbour orders of a test set against a training set, for
/// repeated accuracy evaluation of training subsets and relabelings.
#[derive(Debug, Clone)]
pub struct AccuracyEvaluator {
    k: usize,
    num_classes: usize,
    test_labels: Vec<usize>,
    /// Per test point: training ids by increasing distance.
    neighbours: Vec<Vec<usize>>,
    /// Per test point: raw vote weight of every training id.
    weights: Vec<Vec<f64>>,
}

impl AccuracyEvaluator {
    pub fn new(train: &Dataset, test: &Dataset, spec: &GameSpec) -> Result<Self> {
        if spec.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if !test.is_empty() && train.dim() != test.dim() && !train.is_empty() {
            return Err(Error::LengthMismatch {
                expected: train.dim(),
                actual: test.dim(),
            });
        }
        let mut neighbours = Vec::with_capacity(test.len());
        let mut weights = Vec::with_capacity(test.len());
        for t in test.points() {
            let distances = distances_to(train, &t.features, spec.distance_metric)?;
            weights.push(
                distances
                    .iter()
                    .map(|&d| spec.weight_scheme.raw_weight(d))
                    .collect(),
            );
            neighbours.push(sorted_by_distance(&distances));
        }
        Ok(Self {
            k: spec.k,
            num_classes: train.num_classes().max(test.num_classes()),
            test_labels: test.labels(),
            neighbours,
            weights,
        })
    }

    /// Fraction of test points whose weighted top-k vote over the `present`
    /// training points strictly selects the true label. Ties and empty
    /// training sets count as errors.
    pub fn accuracy(&self, present: &[bool], labels: &[usize], exec: Execution) -> f64 {
        if self.test_labels.is_empty() {
            return 0.0;
        }
        let correct: usize = exec
            .map(self.test_labels.len(), |t| {
                self.correct(t, present, labels) as usize
            })
            .into_iter()
            .sum();
        correct as f64 / self.test_labels.len() as f64
    }

    fn correct(&self, t: usize, present: &[bool], labels: &[usize]) -> bool {
        let mut votes = vec![0.0f64; self.num_classes];
        let mut taken = 0;
        for &id in &self.neighbours[t] {
            if taken == self.k {
                break;
            }
            if present[id] {
                votes[labels[id]] += self.weights[t][id];
                taken += 1;
            }
        }
        if taken == 0 {
            return false;
        }
        let truth = self.test_labels[t];
        let target = votes[truth];
        votes
            .iter()
            .enumerate()
            .all(|(c, &v)| c == truth || v < target)
    }
}

/// Accuracy of the kNN classifier trained on `train_subset` over `test_set`.
pub fn evaluate_knn_accuracy(
    train: &Dataset,
    train_subset: &[usize],
    test_set: &Dataset,
    spec: &GameSpec,
) -> Result<f64> {
    let mut present = vec![false; train.len()];
    for &id in train_subset {
        *present.get_mut(id).ok_or_else(|| {
            Error::InvalidParameter(format!("training subset references unknown id {id}"))
        })? = true;
    }
    let evaluator = AccuracyEvaluator::new(train, test_set, spec)?;
    Ok(evaluator.accuracy(&present, &train.labels(), Execution::Sequential))
}
