//! Baseline three-index counting table, `O(W n^4)` overall.
//!
//! `f_i(w, s, m)` counts coalitions `S` of the points other than `i` with
//! `|S| = s`, top-`min(s, k)` weight sum `w`, and `min(s, k)`-th closest
//! member `m`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::{lower_range, raise_range};
use crate::count::binomial;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ExactValueVector, PreparedGame};

#[derive(Debug, Clone)]
pub struct FTable {
    n: usize,
    k: usize,
    excluded: usize,
    max_weight: i64,
    /// Dense over `s in [0, k]`, `w in [-W, W]`, `m in [0, n]`.
    low: Vec<BigUint>,
    /// Non-zero entries with `s > k`.
    tail: BTreeMap<(i64, usize, usize), BigUint>,
}

impl FTable {
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    /// `f_i(w, s, m)`; zero outside the table.
    pub fn get(&self, w: i64, s: usize, m: usize) -> BigUint {
        if w.abs() > self.max_weight || m > self.n {
            return BigUint::zero();
        }
        if s <= self.k {
            return self.low[low_index(self.n, self.max_weight, s, w, m)].clone();
        }
        self.tail.get(&(w, s, m)).cloned().unwrap_or_default()
    }

    /// Entries for one subset size, summed over weights and last members.
    pub fn size_total(&self, s: usize) -> BigUint {
        if s <= self.k {
            let width = 2 * self.max_weight as usize + 1;
            let stride = width * (self.n + 1);
            self.low[s * stride..(s + 1) * stride].iter().sum()
        } else {
            self.tail
                .iter()
                .filter(|((_, ss, _), _)| *ss == s)
                .map(|(_, v)| v)
                .sum()
        }
    }
}

fn low_index(n: usize, max_weight: i64, s: usize, w: i64, m: usize) -> usize {
    let width = 2 * max_weight as usize + 1;
    (s * width + (w + max_weight) as usize) * (n + 1) + m
}

/// Fills the `s <= k` layers by direct summation over earlier last members,
/// then streams every non-zero `s > k` entry to `visit_tail`.
fn fill(
    game: &PreparedGame,
    i: usize,
    mut visit_tail: impl FnMut(i64, usize, usize, &BigUint),
) -> Vec<BigUint> {
    let n = game.n();
    let k = game.k;
    let big_w = game.max_weight;
    let weight = |m: usize| game.signed_weights[m - 1];
    let mut low = vec![BigUint::zero(); (k + 1) * (2 * big_w as usize + 1) * (n + 1)];
    low[low_index(n, big_w, 0, 0, 0)] = BigUint::one();
    for s in 1..=k.min(n - 1) {
        for w in -big_w..=big_w {
            for m in (1..=n).filter(|&m| m != i) {
                let prev_w = w - weight(m);
                if prev_w.abs() > big_w {
                    continue;
                }
                let mut total = BigUint::zero();
                for mp in (0..m).filter(|&mp| mp != i) {
                    total += &low[low_index(n, big_w, s - 1, prev_w, mp)];
                }
                low[low_index(n, big_w, s, w, m)] = total;
            }
        }
    }
    for s in (k + 1)..n {
        for m in (1..=n).filter(|&m| m != i) {
            let behind = n - m - usize::from(i > m);
            let ways = binomial(behind as u64, (s - k) as u64);
            if ways.is_zero() {
                continue;
            }
            for w in -big_w..=big_w {
                let base = &low[low_index(n, big_w, k, w, m)];
                if !base.is_zero() {
                    visit_tail(w, s, m, &(base * &ways));
                }
            }
        }
    }
    low
}

/// Materialises `f_i` for the point at 1-based position `i`.
pub fn build_f_table(game: &PreparedGame, i: usize) -> Result<FTable> {
    let n = game.n();
    if i == 0 || i > n {
        return Err(Error::InvalidParameter(format!(
            "position {i} outside 1..={n}"
        )));
    }
    let mut tail = BTreeMap::new();
    let low = fill(game, i, |w, s, m, v| {
        tail.insert((w, s, m), v.clone());
    });
    Ok(FTable {
        n,
        k: game.k,
        excluded: i,
        max_weight: game.max_weight,
        low,
        tail,
    })
}

fn tally(w: i64, delta: i64, v: &BigUint, up: &mut BigUint, down: &mut BigUint) {
    if raise_range(delta).contains(&w) {
        *up += v;
    } else if lower_range(delta).contains(&w) {
        *down += v;
    }
}

fn value_numerator(game: &PreparedGame, i: usize) -> BigInt {
    let n = game.n();
    let k = game.k;
    let big_w = game.max_weight;
    let weight = |m: usize| game.signed_weights[m - 1];
    let wi = weight(i);
    let (mut up, mut down) = (BigUint::zero(), BigUint::zero());
    let low = fill(game, i, |w, _s, m, v| {
        if m > i {
            tally(w, wi - weight(m), v, &mut up, &mut down);
        }
    });
    // Coalitions smaller than k: the point joins the top k without displacing anyone.
    for s in 0..k.min(n) {
        for m in (0..=n).filter(|&m| m != i) {
            for w in -big_w..=big_w {
                let v = &low[low_index(n, big_w, s, w, m)];
                if !v.is_zero() {
                    tally(w, wi, v, &mut up, &mut down);
                }
            }
        }
    }
    // Size exactly k: the point displaces the k-th member m, which must lie behind it.
    if k < n {
        for m in (i + 1)..=n {
            for w in -big_w..=big_w {
                let v = &low[low_index(n, big_w, k, w, m)];
                if !v.is_zero() {
                    tally(w, wi - weight(m), v, &mut up, &mut down);
                }
            }
        }
    }
    BigInt::from(up) - BigInt::from(down)
}

/// Exact Banzhaf values with one full counting table per point.
pub fn banzhaf_dp_standard(game: &PreparedGame, exec: Execution) -> ExactValueVector {
    let n = game.n();
    let by_position = exec.map(n, |p| value_numerator(game, p + 1));
    ExactValueVector {
        numerators: game.to_id_order(by_position),
        denominator_log2: n as u64 - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> PreparedGame {
        PreparedGame::from_signed_weights(vec![3, -2, 1, -1], 2).unwrap()
    }

    fn big(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn singleton_layer() {
        let f = build_f_table(&example(), 2).unwrap();
        assert_eq!(f.get(0, 0, 0), big(1));
        assert_eq!(f.get(3, 1, 1), big(1));
        assert_eq!(f.get(1, 1, 3), big(1));
        assert_eq!(f.get(-1, 1, 4), big(1));
        assert_eq!(f.get(-2, 1, 2), big(0));
    }

    #[test]
    fn pair_layer() {
        let f = build_f_table(&example(), 2).unwrap();
        assert_eq!(f.get(4, 2, 3), big(1));
        assert_eq!(f.get(2, 2, 4), big(1));
        assert_eq!(f.get(0, 2, 4), big(1));
        assert_eq!(f.size_total(2), big(3));
    }

    #[test]
    fn tail_layer() {
        let f = build_f_table(&example(), 2).unwrap();
        assert_eq!(f.get(4, 3, 3), big(1));
        for w in -5..=5 {
            assert_eq!(f.get(w, 3, 4), big(0));
        }
    }

    #[test]
    fn example_values() {
        let values = banzhaf_dp_standard(&example(), Execution::Sequential);
        let expected: Vec<BigInt> = [7, -1, 1, -1].into_iter().map(BigInt::from).collect();
        assert_eq!(values.numerators, expected);
        assert_eq!(values.denominator_log2, 3);
    }

    #[test]
    fn second_point_counts() {
        // Only {z3} is pivotal among the small coalitions; nothing in the tail.
        assert_eq!(value_numerator(&example(), 2), BigInt::from(-1));
    }

    #[test]
    fn rejects_bad_position() {
        assert!(build_f_table(&example(), 0).is_err());
        assert!(build_f_table(&example(), 5).is_err());
    }
}
