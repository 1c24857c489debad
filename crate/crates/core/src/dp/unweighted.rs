//! Near-linear counting for unit weights, `O(n k^2)` table operations.
//!
//! Every point shares four table families instead of owning a counting
//! table:
//!
//! * forward `f_i(w, s)`: subsets of the `i` closest points with size `s`
//!   and weight sum `w` (`s <= k`, so the sum is the top-k sum);
//! * backward `b_i(w, s)`: the same over the points from `i` to `n`, with
//!   cumulative `B_i(w, t) = sum_{t' <= t} b_i(w, t')`;
//! * signed backward `b_i^sigma(w, t)`: subsets of the points from `i` to `n`
//!   whose `t`-th closest member has weight `sigma` and whose top-`t` sum is
//!   `w`; members beyond the `t`-th are unconstrained, which is where the
//!   `2^(n-i)` terms (and the big integers) come from.
//!
//! For point `i`, a coalition splits into a part `S1` in front of it (from
//! `f_{i-1}`) and a part `S2` behind it (from the backward tables at `i+1`).
//! With `|S1| = s < k`, either the whole coalition has fewer than `k` members
//! (counted through `B`) or `S2` supplies the `k`-th member at rank
//! `t = k - s`, which the point pushes out; the sign of that member is what
//! the signed tables record.
//!
//! A point with label different from the test label flips the utility off
//! only if the displaced member carries the test label, so its displacement
//! term reads `b^+`. [`NegativeTailTable::Negative`] keeps the alternative
//! reading (`b^-` in that term) so the two can be compared against
//! enumeration; only `Positive` reproduces the brute-force values.
//!
//! Weights of `0` (points masked out of a multi-class subgame) are supported
//! through a third signed family `b^0`.
//!
//! The seeds `b_i^sigma(0, 0) = 1` exist only as recurrence bases in the
//! materialised tables; the value aggregation never reads them.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::{lower_range, raise_range};
use std::ops::AddAssign;

use crate::count::{bounded_counts_fit_u128, Count, Limbs};
use crate::error::{Error, Result};
use crate::model::{ExactValueVector, PreparedGame};

/// Which signed table feeds the displacement term of points whose label
/// differs from the test label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeTailTable {
    /// `b^+`: the displaced k-th member agrees with the test label.
    #[default]
    Positive,
    /// `b^-`: kept for comparison only; disagrees with enumeration.
    Negative,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    k: usize,
    width: usize,
    offset: i64,
}

impl Layout {
    fn new(k: usize) -> Self {
        Self {
            k,
            width: 2 * k + 3,
            offset: k as i64 + 1,
        }
    }

    fn len(&self) -> usize {
        (self.k + 1) * self.width
    }

    fn idx(&self, s: usize, w: i64) -> Option<usize> {
        if w.abs() > self.offset || s > self.k {
            return None;
        }
        Some(s * self.width + (w + self.offset) as usize)
    }

    fn unit<C: Count>(&self) -> Vec<C> {
        let mut t = vec![C::zero(); self.len()];
        t[self.idx(0, 0).unwrap()] = C::one();
        t
    }
}

/// `table(w, s) += table(w - weight, s - 1)` for `s` from `k` down to
/// `first`, i.e. the "include this point or not" recurrence, in place.
fn absorb<C>(table: &mut [C], weight: i64, layout: &Layout, first: usize)
where
    C: Zero + for<'a> AddAssign<&'a C>,
{
    let width = layout.width;
    for s in (first.max(1)..=layout.k).rev() {
        let (lo, hi) = table.split_at_mut(s * width);
        let src = &lo[(s - 1) * width..];
        let dst = &mut hi[..width];
        for (col, slot) in dst.iter_mut().enumerate() {
            let from = col as i64 - weight;
            if from < 0 || from >= width as i64 {
                continue;
            }
            let v = &src[from as usize];
            if !v.is_zero() {
                *slot += v;
            }
        }
    }
}

fn sign_slot(sigma: i64) -> usize {
    (sigma + 1) as usize
}

/// Signed backward tables for the three possible displaced-member weights,
/// indexed by `sign_slot`.
struct SignedTables {
    tables: [Vec<Limbs>; 3],
}

impl SignedTables {
    fn new(layout: &Layout) -> Self {
        Self {
            tables: std::array::from_fn(|_| vec![Limbs::zero(); layout.len()]),
        }
    }

    /// Moves from `b_{i+1}^sigma` to `b_i^sigma` for the point at position `i`.
    fn step(&mut self, weight: i64, free_tail: u64, layout: &Layout, signs: &[i64]) {
        for &sigma in signs {
            absorb(&mut self.tables[sign_slot(sigma)], weight, layout, 2);
        }
        let slot = layout.idx(1, weight).expect("unit weight fits");
        self.tables[sign_slot(weight)][slot].add_pow2(free_tail);
    }
}

fn check_unit(game: &PreparedGame) -> Result<()> {
    if let Some(w) = game.signed_weights.iter().find(|w| w.abs() > 1) {
        return Err(Error::NotUnweighted(format!(
            "weight {w} found; only -1, 0 and +1 are supported"
        )));
    }
    Ok(())
}

fn present_signs(game: &PreparedGame) -> Vec<i64> {
    let mut signs = vec![-1, 1];
    if game.signed_weights.contains(&0) {
        signs.push(0);
    }
    signs
}

/// Net pivotal count of the point at position `i` (1-based).
#[allow(clippy::too_many_arguments)]
fn aggregate<C: Count>(
    weight: i64,
    forward: &[C],
    backward_cum: &[C],
    signed: &SignedTables,
    signs: &[i64],
    layout: &Layout,
    tail: NegativeTailTable,
    coef: &mut [Vec<C>; 6],
) -> BigInt {
    let k = layout.k;
    let (mut small_up, mut small_down) = (C::zero(), C::zero());
    for c in coef.iter_mut() {
        c.iter_mut().for_each(|x| x.set_zero());
    }
    for s in 0..k {
        for w1 in -(s as i64)..=(s as i64) {
            let c = &forward[layout.idx(s, w1).unwrap()];
            if c.is_zero() {
                continue;
            }
            // Whole coalition below k members: nobody is displaced.
            let room = k - 1 - s;
            for (range, acc) in [
                (raise_range(weight), &mut small_up),
                (lower_range(weight), &mut small_down),
            ] {
                for total in range {
                    if let Some(e) = layout.idx(room, total - w1) {
                        let rest = &backward_cum[e];
                        if !rest.is_zero() {
                            *acc += &c.mul_count(rest);
                        }
                    }
                }
            }
            // The member at rank t = k - s behind the point is displaced.
            let t = k - s;
            for &sigma in signs {
                let delta = weight - sigma;
                let table = match tail {
                    NegativeTailTable::Negative if weight < 0 && sigma == 1 => -1,
                    _ => sigma,
                };
                for (range, dir) in [(raise_range(delta), 0), (lower_range(delta), 3)] {
                    for total in range {
                        if let Some(e) = layout.idx(t, total - w1) {
                            coef[dir + sign_slot(table)][e] += c;
                        }
                    }
                }
            }
        }
    }
    let (mut up, mut down) = (Limbs::zero(), Limbs::zero());
    for (dir, acc) in [(0, &mut up), (3, &mut down)] {
        for slot in 0..3 {
            for (e, c) in coef[dir + slot].iter().enumerate() {
                let b = &signed.tables[slot][e];
                if !c.is_zero() && !b.is_zero() {
                    acc.mul_add(b, &c.limbs());
                }
            }
        }
    }
    BigInt::from(small_up.to_biguint() + up.to_biguint())
        - BigInt::from(small_down.to_biguint() + down.to_biguint())
}

fn cumulative<C: Count>(table: &[C], layout: &Layout) -> Vec<C> {
    let mut out = table.to_vec();
    for s in 1..=layout.k {
        for col in 0..layout.width {
            let prev = out[(s - 1) * layout.width + col].clone();
            out[s * layout.width + col] += &prev;
        }
    }
    out
}

fn numerators<C: Count>(game: &PreparedGame, tail: NegativeTailTable) -> Vec<BigInt> {
    let n = game.n();
    let layout = Layout::new(game.k);
    let k = layout.k;
    let block = k * layout.width;
    let weight = |i: usize| game.signed_weights[i - 1];

    // f_{i-1}, layers s < k, for every i.
    let mut forward = Vec::with_capacity(n * block);
    let mut f = layout.unit::<C>();
    for i in 1..=n {
        forward.extend_from_slice(&f[..block]);
        absorb(&mut f, weight(i), &layout, 1);
    }
    drop(f);

    let signs = present_signs(game);
    let mut b = layout.unit::<C>();
    let mut signed = SignedTables::new(&layout);
    let mut coef: [Vec<C>; 6] = std::array::from_fn(|_| vec![C::zero(); layout.len()]);
    let mut out = vec![BigInt::zero(); n];
    for i in (1..=n).rev() {
        let cum = cumulative(&b, &layout);
        let f_prev = &forward[(i - 1) * block..i * block];
        out[i - 1] = aggregate(
            weight(i),
            f_prev,
            &cum,
            &signed,
            &signs,
            &layout,
            tail,
            &mut coef,
        );
        absorb(&mut b, weight(i), &layout, 1);
        signed.step(weight(i), (n - i) as u64, &layout, &signs);
    }
    out
}

/// Exact Banzhaf values for a unit-weight game (weights in `{-1, 0, +1}`).
pub fn banzhaf_dp_unweighted(game: &PreparedGame) -> Result<ExactValueVector> {
    banzhaf_dp_unweighted_with(game, NegativeTailTable::Positive)
}

/// [`banzhaf_dp_unweighted`] with an explicit choice of displacement table
/// for negative points.
pub fn banzhaf_dp_unweighted_with(
    game: &PreparedGame,
    tail: NegativeTailTable,
) -> Result<ExactValueVector> {
    check_unit(game)?;
    let n = game.n();
    let by_position = if bounded_counts_fit_u128(n, game.k) {
        numerators::<u128>(game, tail)
    } else {
        numerators::<BigUint>(game, tail)
    };
    Ok(ExactValueVector {
        numerators: game.to_id_order(by_position),
        denominator_log2: n as u64 - 1,
    })
}

/// Every forward, backward and signed backward table, materialised for
/// inspection. Memory grows as `n^2` bits; meant for small games.
#[derive(Debug, Clone)]
pub struct SharedTables {
    n: usize,
    layout_k: usize,
    forward: Vec<Vec<BigUint>>,
    backward: Vec<Vec<BigUint>>,
    backward_cum: Vec<Vec<BigUint>>,
    plus: Vec<Vec<BigUint>>,
    minus: Vec<Vec<BigUint>>,
}

impl SharedTables {
    fn layout(&self) -> Layout {
        Layout::new(self.layout_k)
    }

    fn read(&self, tables: &[Vec<BigUint>], i: usize, w: i64, s: usize) -> BigUint {
        match (tables.get(i), self.layout().idx(s, w)) {
            (Some(t), Some(e)) => t[e].clone(),
            _ => BigUint::zero(),
        }
    }

    /// `f_i(w, s)` for `i in 0..=n`.
    pub fn forward(&self, i: usize, w: i64, s: usize) -> BigUint {
        self.read(&self.forward, i, w, s)
    }

    /// `b_i(w, s)` for `i in 1..=n+1`.
    pub fn backward(&self, i: usize, w: i64, s: usize) -> BigUint {
        self.read(&self.backward, i, w, s)
    }

    /// `B_i(w, t)` for `i in 1..=n+1`.
    pub fn backward_cumulative(&self, i: usize, w: i64, t: usize) -> BigUint {
        self.read(&self.backward_cum, i, w, t)
    }

    /// `b_i^+(w, t)` for `i in 1..=n+1`.
    pub fn signed_plus(&self, i: usize, w: i64, t: usize) -> BigUint {
        self.read(&self.plus, i, w, t)
    }

    /// `b_i^-(w, t)` for `i in 1..=n+1`.
    pub fn signed_minus(&self, i: usize, w: i64, t: usize) -> BigUint {
        self.read(&self.minus, i, w, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Builds all shared tables of a `{-1, +1}`-weighted game.
pub fn build_shared_tables(game: &PreparedGame) -> Result<SharedTables> {
    check_unit(game)?;
    if game.signed_weights.contains(&0) {
        return Err(Error::NotUnweighted(
            "materialised tables cover +1/-1 weights only".into(),
        ));
    }
    let n = game.n();
    let layout = Layout::new(game.k);
    let weight = |i: usize| game.signed_weights[i - 1];

    let mut forward = vec![layout.unit::<BigUint>()];
    for i in 1..=n {
        let mut next = forward[i - 1].clone();
        absorb(&mut next, weight(i), &layout, 1);
        forward.push(next);
    }

    let signs = [-1, 1];
    let seeded = |t: &Vec<Limbs>| {
        let mut t: Vec<BigUint> = t.iter().map(Limbs::to_biguint).collect();
        t[layout.idx(0, 0).unwrap()] = BigUint::one();
        t
    };
    let mut backward = vec![Vec::new(); n + 2];
    let mut plus = vec![Vec::new(); n + 2];
    let mut minus = vec![Vec::new(); n + 2];
    let mut b = layout.unit::<BigUint>();
    let mut signed = SignedTables::new(&layout);
    backward[n + 1] = b.clone();
    plus[n + 1] = seeded(&signed.tables[sign_slot(1)]);
    minus[n + 1] = seeded(&signed.tables[sign_slot(-1)]);
    for i in (1..=n).rev() {
        absorb(&mut b, weight(i), &layout, 1);
        signed.step(weight(i), (n - i) as u64, &layout, &signs);
        backward[i] = b.clone();
        plus[i] = seeded(&signed.tables[sign_slot(1)]);
        minus[i] = seeded(&signed.tables[sign_slot(-1)]);
    }
    let backward_cum = backward
        .iter()
        .map(|t| {
            if t.is_empty() {
                Vec::new()
            } else {
                cumulative(t, &layout)
            }
        })
        .collect();
    Ok(SharedTables {
        n,
        layout_k: game.k,
        forward,
        backward,
        backward_cum,
        plus,
        minus,
    })
}
