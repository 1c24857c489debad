//! End-to-end valuation runs: dataset in, averaged values out.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dp::{banzhaf_dp_efficient, banzhaf_dp_standard, banzhaf_dp_unweighted};
use crate::error::{Error, Result};
use crate::exec::{with_threads, Execution};
use crate::mc::{banzhaf_mc_coalition, banzhaf_mc_permutation, McMethod};
use crate::model::{
    average_over_tests, decompose_multiclass, Dataset, DistanceMetric, ExactValueVector, GameSpec,
    PreparedGame, TiePolicy, WeightScheme,
};
use crate::oracle::{banzhaf_exact_bruteforce, Enumeration, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Bruteforce,
    Standard,
    Efficient,
    Unweighted,
    McCoalition,
    McPermutation,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::Bruteforce,
        Algo::Standard,
        Algo::Efficient,
        Algo::Unweighted,
        Algo::McCoalition,
        Algo::McPermutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Bruteforce => "bruteforce",
            Algo::Standard => "standard",
            Algo::Efficient => "efficient",
            Algo::Unweighted => "unweighted",
            Algo::McCoalition => "mc-coalition",
            Algo::McPermutation => "mc-permutation",
        }
    }

    pub fn is_exact(self) -> bool {
        self.mc_method().is_none()
    }

    pub fn mc_method(self) -> Option<McMethod> {
        match self {
            Algo::McCoalition => Some(McMethod::Coalition),
            Algo::McPermutation => Some(McMethod::Permutation),
            _ => None,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: Algo,
    pub k: usize,
    pub bits: u32,
    pub weight_scheme: WeightScheme,
    pub distance_metric: DistanceMetric,
    pub samples: usize,
    pub seed: u64,
    /// Share of the input held out as test points when no test file is given.
    pub test_fraction: f64,
    /// 0 means one thread per core.
    pub threads: usize,
    pub budget_secs: f64,
    pub cap_override: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Efficient,
            k: 5,
            bits: GameSpec::DEFAULT_BITS,
            weight_scheme: WeightScheme::Uniform,
            distance_metric: DistanceMetric::Euclidean,
            samples: 1000,
            seed: 0,
            test_fraction: 0.1,
            threads: 0,
            budget_secs: 600.0,
            cap_override: None,
        }
    }
}

impl RunConfig {
    pub fn spec(&self) -> GameSpec {
        GameSpec {
            k: self.k,
            weight_scheme: self.weight_scheme,
            distance_metric: self.distance_metric,
            bits: self.bits,
            tie_policy: TiePolicy::ByIndex,
        }
    }

    pub fn enumeration(&self, exec: Execution) -> Enumeration {
        Enumeration {
            cap: self.cap_override.unwrap_or(DEFAULT_CAP),
            exec,
        }
    }

    pub fn execution(&self) -> Execution {
        if self.threads == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algo == Algo::Unweighted && !self.weight_scheme.is_uniform() {
            return Err(Error::InvalidParameter(
                "the unweighted engine needs the uniform weight scheme".into(),
            ));
        }
        if !self.algo.is_exact() && self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.budget_secs.is_nan() || self.budget_secs <= 0.0 {
            return Err(Error::InvalidParameter(
                "time budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Exact values of one binary game with an exact engine.
pub fn exact_values(
    game: &PreparedGame,
    algo: Algo,
    exec: Execution,
    enumeration: &Enumeration,
) -> Result<ExactValueVector> {
    match algo {
        Algo::Bruteforce => banzhaf_exact_bruteforce(game, enumeration),
        Algo::Standard => Ok(banzhaf_dp_standard(game, exec)),
        Algo::Efficient => banzhaf_dp_efficient(game, exec),
        Algo::Unweighted => banzhaf_dp_unweighted(game),
        Algo::McCoalition | Algo::McPermutation => Err(Error::InvalidParameter(format!(
            "{algo} is not an exact engine"
        ))),
    }
}

/// Splits `data` into (train, test) by a seeded shuffle.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let n = data.len();
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
    if n < 2 {
        return Err(Error::InvalidParameter(
            "need at least two points to hold out a test set".into(),
        ));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test_ids, train_ids) = ids.split_at(n_test);
    let mut train_ids = train_ids.to_vec();
    let mut test_ids = test_ids.to_vec();
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok((data.select(&train_ids)?, data.select(&test_ids)?))
}

/// An exact value as a reduced fraction of decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactFraction {
    pub numerator: String,
    pub denominator: String,
}

impl ExactFraction {
    pub fn from_rational(r: &BigRational) -> Self {
        Self {
            numerator: r.numer().to_string(),
            denominator: r.denom().to_string(),
        }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        let parse = |s: &str| {
            s.parse()
                .map_err(|_| Error::InvalidParameter(format!("`{s}` is not an integer")))
        };
        let den: num_bigint::BigInt = parse(&self.denominator)?;
        if den == num_bigint::BigInt::from(0) {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Ok(BigRational::new(parse(&self.numerator)?, den))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub prepare_secs: f64,
    pub engine_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationReport {
    pub config: RunConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub num_classes: usize,
    /// Averaged value per training id.
    pub values: Vec<f64>,
    /// Exact averaged values, for exact engines.
    pub exact: Option<Vec<ExactFraction>>,
    pub timing: Timing,
}

impl ValuationReport {
    pub fn exact_rationals(&self) -> Result<Option<Vec<BigRational>>> {
        self.exact
            .as_ref()
            .map(|v| v.iter().map(ExactFraction::to_rational).collect())
            .transpose()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Values every training point against every test point and averages.
/// Running exact mean over test points. Sums stay dyadic per subgame count,
/// so the gcd reductions happen once per training point instead of once per
/// test point.
#[derive(Default)]
struct ExactMean {
    groups: BTreeMap<usize, (Vec<BigInt>, u64)>,
    tests: usize,
}

impl ExactMean {
    fn add(&mut self, vectors: &[ExactValueVector]) -> Result<()> {
        let (mut sums, mut log2) = ExactValueVector::sum(vectors)?;
        self.tests += 1;
        match self.groups.get_mut(&vectors.len()) {
            None => {
                self.groups.insert(vectors.len(), (sums, log2));
            }
            Some((acc, acc_log2)) => {
                if acc.len() != sums.len() {
                    return Err(Error::LengthMismatch {
                        expected: acc.len(),
                        actual: sums.len(),
                    });
                }
                if *acc_log2 < log2 {
                    let lift = log2 - *acc_log2;
                    acc.iter_mut().for_each(|a| *a <<= lift);
                    *acc_log2 = log2;
                } else if log2 < *acc_log2 {
                    let lift = *acc_log2 - log2;
                    sums.iter_mut().for_each(|x| *x <<= lift);
                    log2 = *acc_log2;
                }
                debug_assert_eq!(log2, *acc_log2);
                for (a, x) in acc.iter_mut().zip(sums) {
                    *a += x;
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<BigRational>> {
        let n = match self.groups.values().next() {
            Some((sums, _)) => sums.len(),
            None => return Err(Error::InvalidParameter("no test points to average".into())),
        };
        let mut out = vec![BigRational::zero(); n];
        for (count, (sums, log2)) in self.groups {
            let den = (BigInt::one() << log2) * BigInt::from(count) * BigInt::from(self.tests);
            for (o, s) in out.iter_mut().zip(sums) {
                *o += BigRational::new(s, den.clone());
            }
        }
        Ok(out)
    }
}

pub fn run_value(config: &RunConfig, train: &Dataset, test: &Dataset) -> Result<ValuationReport> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if test.is_empty() {
        return Err(Error::InvalidParameter("no test points".into()));
    }
    if test.dim() != train.dim() {
        return Err(Error::LengthMismatch {
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    let spec = config.spec();
    spec.validate_for(train.len())?;
    let exec = config.execution();
    let enumeration = config.enumeration(exec);
    let start = Instant::now();
    let (mut prepare, mut engine) = (0.0, 0.0);
    let check_budget = || {
        let spent = start.elapsed().as_secs_f64();
        if spent > config.budget_secs {
            Err(Error::Timeout(config.budget_secs))
        } else {
            Ok(())
        }
    };

    with_threads(config.threads, || {
        let mut exact_sum = ExactMean::default();
        let mut float_per_test = Vec::new();
        for (t, point) in test.points().iter().enumerate() {
            let t0 = Instant::now();
            let subgames: Vec<PreparedGame> =
                decompose_multiclass(train, &point.features, point.label, &spec)?
                    .iter()
                    .map(|s| s.game())
                    .collect();
            let t1 = Instant::now();
            prepare += (t1 - t0).as_secs_f64();
            match config.algo.mc_method() {
                None => {
                    let vectors = subgames
                        .iter()
                        .map(|g| exact_values(g, config.algo, exec, &enumeration))
                        .collect::<Result<Vec<_>>>()?;
                    exact_sum.add(&vectors)?;
                }
                Some(method) => {
                    let seed = config.seed.wrapping_add(t as u64);
                    let estimates = subgames
                        .iter()
                        .map(|g| match method {
                            McMethod::Coalition => {
                                banzhaf_mc_coalition(g, config.samples, seed, exec)
                            }
                            McMethod::Permutation => {
                                banzhaf_mc_permutation(g, config.samples, seed, exec)
                            }
                        })
                        .map(|r| r.map(|e| e.values))
                        .collect::<Result<Vec<_>>>()?;
                    float_per_test.push(average_over_tests(&estimates)?);
                }
            }
            engine += t1.elapsed().as_secs_f64();
            check_budget()?;
        }
        let (values, exact) = if config.algo.is_exact() {
            let exact = exact_sum.finish()?;
            (
                exact.iter().map(rational_to_f64).collect(),
                Some(exact.iter().map(ExactFraction::from_rational).collect()),
            )
        } else {
            (average_over_tests(&float_per_test)?, None)
        };
        Ok(ValuationReport {
            config: config.clone(),
            n_train: train.len(),
            n_test: test.len(),
            num_classes: train.num_classes(),
            values,
            exact,
            timing: Timing {
                prepare_secs: prepare,
                engine_secs: engine,
                total_secs: start.elapsed().as_secs_f64(),
            },
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(labels: &[usize]) -> Dataset {
        let features = (1..=labels.len()).map(|d| vec![d as f64]).collect();
        Dataset::from_rows(features, labels.to_vec()).unwrap()
    }

    #[test]
    fn exact_mean_matches_rational_average() {
        let a = ExactValueVector {
            numerators: vec![3.into(), (-1).into()],
            denominator_log2: 2,
        };
        let b = ExactValueVector {
            numerators: vec![1.into(), 1.into()],
            denominator_log2: 1,
        };
        let c = ExactValueVector {
            numerators: vec![0.into(), 5.into()],
            denominator_log2: 3,
        };
        let per_test = [vec![a.clone(), b.clone()], vec![c.clone()], vec![b, a]];
        let mut acc = ExactMean::default();
        let mut expected = Vec::new();
        for vectors in &per_test {
            acc.add(vectors).unwrap();
            expected.push(ExactValueVector::mean(vectors).unwrap());
        }
        assert_eq!(
            acc.finish().unwrap(),
            average_over_tests(&expected).unwrap()
        );
    }

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
        }
        assert!("fast".parse::<Algo>().is_err());
    }

    #[test]
    fn unweighted_needs_uniform() {
        let config = RunConfig {
            algo: Algo::Unweighted,
            weight_scheme: WeightScheme::Rbf { sigma: 1.0 },
            ..RunConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn exact_run_on_line() {
        let train = line(&[1, 0, 1, 0]);
        let test = Dataset::from_rows(vec![vec![0.0]], vec![1]).unwrap();
        let config = RunConfig {
            algo: Algo::Unweighted,
            k: 2,
            ..RunConfig::default()
        };
        let report = run_value(&config, &train, &test).unwrap();
        assert_eq!(report.values[2], 0.25);
        let exact = report.exact_rationals().unwrap().unwrap();
        assert_eq!(exact[2], BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn split_sizes() {
        let data = line(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let (train, test) = split_train_test(&data, 0.3, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        assert_eq!(split_train_test(&data, 0.3, 1).unwrap().1, test);
    }
}
