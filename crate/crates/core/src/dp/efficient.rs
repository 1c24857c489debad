//! Prefix-sum accelerated counting, `O(W k n^2)` overall.
//!
//! Layers `s <= k` are produced from layer `s - 1` with a running prefix sum
//! over the last member `m`, so each entry costs O(1). Coalitions larger than
//! `k` are never enumerated: every size-`k` coalition ending at `m` extends by
//! any subset of the `n - m` farther points, and the number of extensions
//! that stay within `n - 1` points is `g(m)`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::{lower_range, raise_range};
use crate::count::{bounded_counts_fit_u128, Count, ShiftAccumulator};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ExactValueVector, PreparedGame};

/// `g(m) = sum_{j in [0, n-k-1]} C(n-m, j)` for `m in 1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GVector {
    n: usize,
    k: usize,
    values: Vec<BigUint>,
}

impl GVector {
    /// `g(m)` for `1 <= m <= n`.
    pub fn get(&self, m: usize) -> &BigUint {
        &self.values[m]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Builds `g` from the top down with `g(m) = 2 g(m+1) - C(n-m-1, n-k-1)`.
/// The correction is non-zero only for `m <= k` and is carried downward by
/// `C(n-m, n-k-1) = C(n-m-1, n-k-1) (n-m) / (k-m+1)`.
pub fn compute_g(n: usize, k: usize) -> Result<GVector> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "g needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut values = vec![BigUint::zero(); n + 1];
    if k == n {
        // No coalition of the other n - 1 points reaches size k.
        return Ok(GVector { n, k, values });
    }
    values[n] = BigUint::one();
    let mut correction = BigUint::one(); // C(n-k-1, n-k-1), the value at m = k
    for m in (1..n).rev() {
        let mut g = &values[m + 1] << 1u32;
        if m <= k {
            if m < k {
                correction = correction * (n - m - 1) / (k - m);
            }
            g -= &correction;
        }
        values[m] = g;
    }
    Ok(GVector { n, k, values })
}

/// Per-game data shared by every point's count.
struct Shared<'a> {
    game: &'a PreparedGame,
    g: GVector,
    /// Weight values reachable by the top-s sum, per `s in [0, k]`.
    active: Vec<Vec<i64>>,
}

impl<'a> Shared<'a> {
    fn new(game: &'a PreparedGame) -> Result<Self> {
        let n = game.n();
        let k = game.k;
        let g = compute_g(n, k)?;
        let mut levels = game.signed_weights.clone();
        levels.sort_unstable();
        levels.dedup();
        let big_w = game.max_weight;
        let mut active = vec![vec![0i64]];
        for s in 1..=k {
            let mut next: Vec<i64> = active[s - 1]
                .iter()
                .flat_map(|u| levels.iter().map(move |v| u + v))
                .filter(|w| w.abs() <= big_w)
                .collect();
            next.sort_unstable();
            next.dedup();
            active.push(next);
        }
        Ok(Self { game, g, active })
    }

    fn weight(&self, m: usize) -> i64 {
        self.game.signed_weights[m - 1]
    }

    fn row(&self, w: i64) -> usize {
        (w + self.game.max_weight) as usize
    }

    fn value_numerator<C: Count>(&self, i: usize) -> BigInt {
        let n = self.game.n();
        let k = self.game.k;
        let cols = n + 1;
        let rows = 2 * self.game.max_weight as usize + 1;
        let wi = self.weight(i);
        let mut prev = vec![C::zero(); rows * cols];
        let mut cur = vec![C::zero(); rows * cols];
        prev[self.row(0) * cols] = C::one();
        let (mut small_up, mut small_down) = (C::zero(), C::zero());
        let tally = |w: i64, delta: i64, v: &C, up: &mut C, down: &mut C| {
            if raise_range(delta).contains(&w) {
                *up += v;
            } else if lower_range(delta).contains(&w) {
                *down += v;
            }
        };
        // The empty coalition.
        tally(
            0,
            wi,
            &prev[self.row(0) * cols],
            &mut small_up,
            &mut small_down,
        );

        for s in 1..=k.min(n - 1) {
            // Rows from two layers back may lie outside this layer's active set.
            cur.iter_mut().for_each(|x| x.set_zero());
            for &u in &self.active[s - 1] {
                let src = self.row(u) * cols;
                let mut prefix = C::zero();
                for m in 0..=n {
                    if m == i {
                        continue;
                    }
                    if m > 0 && !prefix.is_zero() {
                        let target = u + self.weight(m);
                        let dst = self.row(target) * cols + m;
                        cur[dst] += &prefix;
                    }
                    prefix += &prev[src + m];
                }
            }
            if s < k {
                for &w in &self.active[s] {
                    let r = self.row(w) * cols;
                    let mut row_total = C::zero();
                    for v in &cur[r..r + cols] {
                        row_total += v;
                    }
                    tally(w, wi, &row_total, &mut small_up, &mut small_down);
                }
            }
            std::mem::swap(&mut prev, &mut cur);
        }

        // Coalitions of size >= k whose k-th member m lies behind i.
        let mut tail_up = ShiftAccumulator::new();
        let mut tail_down = ShiftAccumulator::new();
        let (mut near_up, mut near_down) = (BigUint::zero(), BigUint::zero());
        if k < n {
            for m in (i + 1)..=n {
                let delta = wi - self.weight(m);
                let (mut x_up, mut x_down) = (C::zero(), C::zero());
                for w in raise_range(delta).chain(lower_range(delta)) {
                    if w.abs() > self.game.max_weight {
                        continue;
                    }
                    let v = &prev[self.row(w) * cols + m];
                    tally(w, delta, v, &mut x_up, &mut x_down);
                }
                if m > k {
                    // g(m) = 2^(n-m) once every extension size fits.
                    debug_assert_eq!(self.g.get(m), &(BigUint::one() << (n - m)));
                    tail_up.add_shifted(&x_up, n - m);
                    tail_down.add_shifted(&x_down, n - m);
                } else {
                    near_up += x_up.mul_big(self.g.get(m));
                    near_down += x_down.mul_big(self.g.get(m));
                }
            }
        }
        let up = small_up.to_biguint() + near_up + tail_up.into_biguint();
        let down = small_down.to_biguint() + near_down + tail_down.into_biguint();
        BigInt::from(up) - BigInt::from(down)
    }
}

/// Exact Banzhaf values with prefix sums and aggregated tails.
pub fn banzhaf_dp_efficient(game: &PreparedGame, exec: Execution) -> Result<ExactValueVector> {
    let n = game.n();
    let shared = Shared::new(game)?;
    let fits = bounded_counts_fit_u128(n, game.k);
    let by_position = exec.map(n, |p| {
        if fits {
            shared.value_numerator::<u128>(p + 1)
        } else {
            shared.value_numerator::<BigUint>(p + 1)
        }
    });
    Ok(ExactValueVector {
        numerators: game.to_id_order(by_position),
        denominator_log2: n as u64 - 1,
    })
}
