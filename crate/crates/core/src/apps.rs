//! Downstream uses of a value vector: removal, selection, mislabel detection
//! and label repair.
//!
//! Accuracy is always that of the unweighted kNN classifier, whatever weight
//! scheme produced the values. Value ties are broken by ascending id.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{AccuracyEvaluator, Dataset, GameSpec, WeightScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Step indices, `0..=steps`.
    pub x: Vec<usize>,
    /// Accuracy after each step.
    pub y: Vec<f64>,
    pub metadata: CurveMeta,
}

impl Curve {
    pub fn with_algorithm(mut self, algorithm: impl Into<String>) -> Self {
        self.metadata.algorithm = algorithm.into();
        self
    }

    /// Trapezoidal area under the curve over its step axis.
    pub fn area(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.y.windows(2))
            .map(|(x, y)| (x[1] - x[0]) as f64 * (y[0] + y[1]) / 2.0)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseMask {
    pub flipped_ids: BTreeSet<usize>,
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc_roc: f64,
}

/// Ids by decreasing value, ties by ascending id.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..values.len()).collect();
    ids.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    ids
}

/// Ids by increasing value, ties by ascending id.
pub fn rank_ascending(values: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..values.len()).collect();
    ids.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    ids
}

fn evaluator(train: &Dataset, test: &Dataset, spec: &GameSpec) -> Result<AccuracyEvaluator> {
    let plain = GameSpec {
        weight_scheme: WeightScheme::Uniform,
        ..*spec
    };
    AccuracyEvaluator::new(train, test, &plain)
}

fn check_values(values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: values.len(),
        });
    }
    Ok(())
}

fn check_steps(steps: usize, available: usize) -> Result<()> {
    if steps > available {
        return Err(Error::InvalidParameter(format!(
            "{steps} steps requested but only {available} points are available"
        )));
    }
    Ok(())
}

fn curve(y: Vec<f64>, spec: &GameSpec, seed: Option<u64>) -> Curve {
    Curve {
        x: (0..y.len()).collect(),
        y,
        metadata: CurveMeta {
            algorithm: "unspecified".into(),
            seed,
            k: spec.k,
        },
    }
}

/// Accuracy after removing the `t` most valuable points, `t = 0..=steps`.
pub fn point_removal_curve(
    train: &Dataset,
    test: &Dataset,
    values: &[f64],
    spec: &GameSpec,
    steps: usize,
    exec: Execution,
) -> Result<Curve> {
    check_values(values, train.len())?;
    check_steps(steps, train.len())?;
    let eval = evaluator(train, test, spec)?;
    let order = rank_descending(values);
    let labels = train.labels();
    let y = exec.map(steps + 1, |t| {
        let mut present = vec![true; train.len()];
        for &id in &order[..t] {
            present[id] = false;
        }
        eval.accuracy(&present, &labels, Execution::Sequential)
    });
    Ok(curve(y, spec, None))
}

/// Accuracy of `warmup` random points plus the `t` most valuable remaining
/// points, `t = 0..=steps`.
#[allow(clippy::too_many_arguments)]
pub fn data_selection_curve(
    train: &Dataset,
    test: &Dataset,
    values: &[f64],
    spec: &GameSpec,
    warmup: usize,
    steps: usize,
    seed: u64,
    exec: Execution,
) -> Result<Curve> {
    let n = train.len();
    check_values(values, n)?;
    if warmup == 0 {
        return Err(Error::InvalidParameter("warmup must be at least 1".into()));
    }
    check_steps(warmup + steps, n)?;
    let eval = evaluator(train, test, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeded = vec![false; n];
    for id in sample(&mut rng, n, warmup) {
        seeded[id] = true;
    }
    let order: Vec<usize> = rank_descending(values)
        .into_iter()
        .filter(|&id| !seeded[id])
        .collect();
    let labels = train.labels();
    let y = exec.map(steps + 1, |t| {
        let mut present = seeded.clone();
        for &id in &order[..t] {
            present[id] = true;
        }
        eval.accuracy(&present, &labels, Execution::Sequential)
    });
    Ok(curve(y, spec, Some(seed)))
}

/// Gives `round(rate n)` random points a uniformly drawn different label.
pub fn inject_label_noise(train: &Dataset, rate: f64, seed: u64) -> Result<(Dataset, NoiseMask)> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "noise rate must lie in (0, 1), got {rate}"
        )));
    }
    let n = train.len();
    let classes = train.num_classes();
    let count = (rate * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = sample(&mut rng, n, count).into_vec();
    ids.sort_unstable();
    let mut labels = train.labels();
    for &id in &ids {
        let shift = rng.random_range(1..classes);
        labels[id] = (labels[id] + shift) % classes;
    }
    Ok((
        train.with_labels(&labels)?,
        NoiseMask {
            flipped_ids: ids.into_iter().collect(),
            rate,
            seed,
        },
    ))
}

/// Flags the `round(rate n)` lowest-valued points as mislabeled and scores the
/// guess against the mask. AUC ranks points by negated value.
pub fn mislabel_detection_scores(values: &[f64], mask: &NoiseMask, rate: f64) -> DetectionScores {
    let n = values.len();
    let flagged = ((rate * n as f64).round() as usize).min(n);
    let predicted: BTreeSet<usize> = rank_ascending(values).into_iter().take(flagged).collect();
    let hits = predicted.intersection(&mask.flipped_ids).count() as f64;
    let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
    let precision = ratio(hits, predicted.len());
    let recall = ratio(hits, mask.flipped_ids.len());
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let noisy: Vec<bool> = (0..n).map(|i| mask.flipped_ids.contains(&i)).collect();
    let scores: Vec<f64> = values.iter().map(|v| -v).collect();
    DetectionScores {
        precision,
        recall,
        f1,
        auc_roc: auc(&scores, &noisy),
    }
}

/// Mann-Whitney AUC of `scores` for the positive class, ties counting half.
/// 0.5 when either class is empty.
pub fn auc(scores: &[f64], positive: &[bool]) -> f64 {
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return 0.5;
    }
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of mid-ranks of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < ids.len() {
        let mut end = start;
        while end < ids.len() && scores[ids[end]] == scores[ids[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        rank_sum += mid * ids[start..end].iter().filter(|&&i| positive[i]).count() as f64;
        start = end;
    }
    let pos = pos as f64;
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg as f64)
}

/// Accuracy after flipping the labels of the `t` lowest-valued points of a
/// binary training set, `t = 0..=steps`.
pub fn label_flip_repair_curve(
    train_corrupted: &Dataset,
    test: &Dataset,
    values: &[f64],
    spec: &GameSpec,
    steps: usize,
    exec: Execution,
) -> Result<Curve> {
    if train_corrupted.num_classes() != 2 {
        return Err(Error::NotBinary(train_corrupted.num_classes()));
    }
    check_values(values, train_corrupted.len())?;
    check_steps(steps, train_corrupted.len())?;
    let eval = evaluator(train_corrupted, test, spec)?;
    let order = rank_ascending(values);
    let base = train_corrupted.labels();
    let present = vec![true; train_corrupted.len()];
    let y = exec.map(steps + 1, |t| {
        let mut labels = base.clone();
        for &id in &order[..t] {
            labels[id] = 1 - labels[id];
        }
        eval.accuracy(&present, &labels, Execution::Sequential)
    });
    Ok(curve(y, spec, None))
}

/// Balanced binary dataset from two isotropic unit Gaussians whose means are
/// `separation` apart. Labels alternate `0, 1, 0, ...`.
pub fn two_gaussians(n: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let shift = separation / 2.0 / (dim as f64).sqrt();
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let features = labels
        .iter()
        .map(|&l| {
            let centre = if l == 1 { shift } else { -shift };
            (0..dim).map(|_| centre + noise.sample(&mut rng)).collect()
        })
        .collect();
    Dataset::from_rows(features, labels)
}
