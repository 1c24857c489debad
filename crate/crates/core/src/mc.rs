//! Sampling estimators for the Banzhaf value.
//!
//! Both estimators only ever look at the few closest members of a sampled
//! coalition. A point ranked beyond the `(k+1)`-th closest member neither
//! enters nor leaves the top `k`, so its marginal contribution is zero.

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ExactValueVector, PreparedGame};

/// Rounds handled by one task; fixed so that results do not depend on the
/// thread count.
const ROUNDS_PER_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMethod {
    Coalition,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateVector {
    /// Estimates in id order.
    pub values: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub method: McMethod,
}

/// The `k + 1` closest members of a coalition, by game position, together
/// with prefix sums of their signed weights.
#[derive(Debug, Clone)]
pub struct TopKWindow {
    k: usize,
    positions: Vec<usize>,
    prefix: Vec<i64>,
}

impl TopKWindow {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            positions: Vec::with_capacity(k + 1),
            prefix: vec![0],
        }
    }

    pub fn clear(&mut self) {
        self.positions.clear();
        self.prefix.truncate(1);
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// True once `k + 1` members are held; later members never matter.
    pub fn is_full(&self) -> bool {
        self.positions.len() > self.k
    }

    /// Adds a member. Members must arrive in increasing position order.
    pub fn push(&mut self, position: usize, weight: i64) {
        debug_assert!(!self.is_full());
        debug_assert!(self.positions.last().is_none_or(|&p| p < position));
        self.positions.push(position);
        let last = *self.prefix.last().unwrap();
        self.prefix.push(last + weight);
    }

    /// Builds the window of a whole coalition given as positions.
    pub fn from_coalition(game: &PreparedGame, positions: &[usize]) -> Self {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let mut window = Self::new(game.k);
        for p in sorted.into_iter().take(game.k + 1) {
            window.push(p, game.signed_weights[p]);
        }
        window
    }

    fn sum(&self, count: usize) -> i64 {
        self.prefix[count.min(self.positions.len())]
    }

    /// `v(S + p) - v(S - p)` for the point at `position`, where `S` is the
    /// coalition the window was built from.
    pub fn marginal(&self, position: usize, weight: i64) -> i8 {
        let k = self.k;
        let rank = self.positions.partition_point(|&p| p < position);
        let member = self.positions.get(rank) == Some(&position);
        let (with, without) = if member {
            if rank >= k {
                return 0;
            }
            (self.sum(k), self.sum(k + 1) - weight)
        } else {
            if rank >= k {
                return 0;
            }
            (self.sum(k - 1) + weight, self.sum(k))
        };
        i8::from(with > 0) - i8::from(without > 0)
    }
}

fn round_rng(seed: u64, round: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

fn check_samples(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    Ok(())
}

fn chunked<T: Send>(
    m: usize,
    exec: Execution,
    run: impl Fn(std::ops::Range<usize>) -> T + Sync + Send,
) -> Vec<T> {
    let chunks = m.div_ceil(ROUNDS_PER_CHUNK);
    exec.map(chunks, |c| {
        run(c * ROUNDS_PER_CHUNK..((c + 1) * ROUNDS_PER_CHUNK).min(m))
    })
}

/// Coalition sampling: each round draws one coalition with fair coins and
/// scores every point against it.
pub fn banzhaf_mc_coalition(
    game: &PreparedGame,
    m: usize,
    seed: u64,
    exec: Execution,
) -> Result<EstimateVector> {
    check_samples(m)?;
    let n = game.n();
    let partials = chunked(m, exec, |rounds| {
        let mut sums = vec![0i64; n];
        let mut window = TopKWindow::new(game.k);
        for round in rounds {
            let mut rng = round_rng(seed, round);
            window.clear();
            // Coins are only needed until the window fills up.
            let mut scanned = 0;
            let mut bits = 0u64;
            while scanned < n && !window.is_full() {
                if scanned % 64 == 0 {
                    bits = rng.random();
                }
                if bits & 1 == 1 {
                    window.push(scanned, game.signed_weights[scanned]);
                }
                bits >>= 1;
                scanned += 1;
            }
            for (p, sum) in sums.iter_mut().enumerate().take(scanned) {
                *sum += window.marginal(p, game.signed_weights[p]) as i64;
            }
        }
        sums
    });
    let mut totals = vec![0i64; n];
    for part in partials {
        for (t, v) in totals.iter_mut().zip(part) {
            *t += v;
        }
    }
    let values = totals.into_iter().map(|t| t as f64 / m as f64).collect();
    Ok(EstimateVector {
        values: game.to_id_order(values),
        samples: m,
        seed,
        method: McMethod::Coalition,
    })
}

/// `n C(n-1, s) / 2^(n-1)` for every predecessor count `s`.
///
/// Built with the ratio `C(n-1, s+1) / C(n-1, s) = (n-1-s) / (s+1)` in the
/// log domain: the end points `n / 2^(n-1)` underflow a double once `n`
/// passes about a thousand, while the weights that matter stay near `sqrt n`.
pub fn permutation_weights(n: usize) -> Vec<f64> {
    let mut log_weight = (n as f64).ln() - (n as f64 - 1.0) * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        out.push(log_weight.exp());
        if s + 1 < n {
            log_weight += ((n - 1 - s) as f64).ln() - ((s + 1) as f64).ln();
        }
    }
    out
}

/// Permutation sampling with each marginal reweighted by the number of
/// coalitions of its predecessor-set size.
pub fn banzhaf_mc_permutation(
    game: &PreparedGame,
    m: usize,
    seed: u64,
    exec: Execution,
) -> Result<EstimateVector> {
    check_samples(m)?;
    let n = game.n();
    let k = game.k;
    let weights = permutation_weights(n);
    let partials = chunked(m, exec, |rounds| {
        let mut sums = vec![0f64; n];
        let mut order: Vec<usize> = (0..n).collect();
        // Top-k predecessors by position, with their weights.
        let mut top: Vec<(usize, i64)> = Vec::with_capacity(k + 1);
        for round in rounds {
            let mut rng = round_rng(seed, round);
            order.iter_mut().enumerate().for_each(|(i, p)| *p = i);
            order.shuffle(&mut rng);
            top.clear();
            let mut top_sum = 0i64;
            for (s, &p) in order.iter().enumerate() {
                let rank = top.partition_point(|&(q, _)| q < p);
                if rank >= k {
                    continue;
                }
                let w = game.signed_weights[p];
                let displaced = if top.len() == k { top[k - 1].1 } else { 0 };
                let with = top_sum - displaced + w;
                let delta = i8::from(with > 0) - i8::from(top_sum > 0);
                if delta != 0 {
                    sums[p] += delta as f64 * weights[s];
                }
                top.insert(rank, (p, w));
                top.truncate(k);
                top_sum = with;
            }
        }
        sums
    });
    let mut totals = vec![0f64; n];
    for part in partials {
        for (t, v) in totals.iter_mut().zip(part) {
            *t += v;
        }
    }
    let values = totals.into_iter().map(|t| t / m as f64).collect();
    Ok(EstimateVector {
        values: game.to_id_order(values),
        samples: m,
        seed,
        method: McMethod::Permutation,
    })
}

/// Largest absolute error, relative to the largest exact magnitude.
pub fn deviation(estimate: &EstimateVector, exact: &ExactValueVector) -> Result<f64> {
    deviation_f64(&estimate.values, &exact.to_f64())
}

/// [`deviation`] on plain slices.
pub fn deviation_f64(estimate: &[f64], exact: &[f64]) -> Result<f64> {
    if estimate.len() != exact.len() {
        return Err(Error::LengthMismatch {
            expected: exact.len(),
            actual: estimate.len(),
        });
    }
    let err = estimate
        .iter()
        .zip(exact)
        .map(|(e, x)| (e - x).abs())
        .fold(0.0, f64::max);
    let scale = exact.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(if scale > 0.0 {
        err / scale
    } else if err > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}
