//! Exhaustive enumeration: the exact reference every other engine is
//! checked against. Exponential in `n`; guarded by a size cap.
//!
//! Coalitions are bitmasks over game positions (bit `p` = the `p`-th closest
//! point), so the top-k members of a coalition are its lowest set bits.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::count::binomial;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{ExactValueVector, PreparedGame};

pub const DEFAULT_CAP: usize = 20;
/// Absolute ceiling regardless of overrides: the value table has `2^n` entries.
pub const HARD_LIMIT: usize = 30;

#[derive(Debug, Clone, Copy)]
pub struct Enumeration {
    pub cap: usize,
    pub exec: Execution,
}

impl Default for Enumeration {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            exec: Execution::default(),
        }
    }
}

impl Enumeration {
    pub fn with_cap(cap: usize) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let cap = self.cap.min(HARD_LIMIT);
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        Ok(())
    }
}

/// Hard-label utility of a coalition given as a position bitmask: 1 iff the
/// signed weights of its `min(|S|, k)` closest members sum to a positive value.
pub fn value_of_mask(game: &PreparedGame, mask: u64) -> u8 {
    let mut rest = mask;
    let mut sum = 0i64;
    let mut taken = 0;
    while rest != 0 && taken < game.k {
        let pos = rest.trailing_zeros() as usize;
        sum += game.signed_weights[pos];
        taken += 1;
        rest &= rest - 1;
    }
    u8::from(sum > 0)
}

/// [`value_of_mask`] for a coalition listed by original point id.
pub fn value_function(game: &PreparedGame, coalition: &[usize]) -> u8 {
    let positions = positions_by_id(game);
    let mut members: Vec<usize> = coalition.iter().map(|&id| positions[id]).collect();
    members.sort_unstable();
    members.dedup();
    let sum: i64 = members
        .iter()
        .take(game.k)
        .map(|&p| game.signed_weights[p])
        .sum();
    u8::from(sum > 0)
}

pub(crate) fn positions_by_id(game: &PreparedGame) -> Vec<usize> {
    let mut pos = vec![0; game.n()];
    for (p, &id) in game.order.iter().enumerate() {
        pos[id] = p;
    }
    pos
}

fn value_table(game: &PreparedGame, exec: Execution) -> Vec<u8> {
    let n = game.n();
    let total = 1u64 << n;
    let chunk = 1u64 << n.min(14);
    let chunks = (total / chunk) as usize;
    exec.map(chunks, |c| {
        let start = c as u64 * chunk;
        (start..start + chunk)
            .map(|mask| value_of_mask(game, mask))
            .collect::<Vec<u8>>()
    })
    .concat()
}

/// Numbers of coalitions `S` (not containing the point) where joining raises
/// the utility 0 -> 1 and where it lowers it 1 -> 0, per position.
fn flip_counts(game: &PreparedGame, table: &[u8], exec: Execution) -> Vec<(u64, u64)> {
    let n = game.n();
    exec.map(n, |pos| {
        let bit = 1u64 << pos;
        let (mut raises, mut lowers) = (0u64, 0u64);
        for mask in 0..(1u64 << n) {
            if mask & bit != 0 {
                continue;
            }
            match (table[mask as usize], table[(mask | bit) as usize]) {
                (0, 1) => raises += 1,
                (1, 0) => lowers += 1,
                _ => {}
            }
        }
        (raises, lowers)
    })
}

/// Exact Banzhaf values by enumerating all `2^(n-1)` coalitions per point.
pub fn banzhaf_exact_bruteforce(
    game: &PreparedGame,
    opts: &Enumeration,
) -> Result<ExactValueVector> {
    let n = game.n();
    opts.check(n)?;
    let table = value_table(game, opts.exec);
    let by_position: Vec<BigInt> = flip_counts(game, &table, opts.exec)
        .into_iter()
        .map(|(up, down)| BigInt::from(up) - BigInt::from(down))
        .collect();
    Ok(ExactValueVector {
        numerators: game.to_id_order(by_position),
        denominator_log2: n as u64 - 1,
    })
}

/// Exact Shapley values from the coalition form: each size-`s` coalition
/// carries weight `1 / (n C(n-1, s))`.
pub fn shapley_exact_bruteforce(
    game: &PreparedGame,
    opts: &Enumeration,
) -> Result<Vec<BigRational>> {
    let n = game.n();
    opts.check(n)?;
    let table = value_table(game, opts.exec);
    let by_position = opts.exec.map(n, |pos| {
        let bit = 1u64 << pos;
        let mut net_by_size = vec![0i64; n];
        for mask in 0..(1u64 << n) {
            if mask & bit != 0 {
                continue;
            }
            let delta = table[(mask | bit) as usize] as i64 - table[mask as usize] as i64;
            net_by_size[mask.count_ones() as usize] += delta;
        }
        net_by_size
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (s, &net)| {
                let den = BigUint::from(n) * binomial(n as u64 - 1, s as u64);
                acc + BigRational::new(net.into(), den.into())
            })
    });
    Ok(game.to_id_order(by_position))
}

/// Shapley values from the permutation form, averaging marginals over all
/// `n!` orderings. Only meant as a cross-check for tiny games (`n <= 9`).
pub fn shapley_exact_permutations(game: &PreparedGame) -> Result<Vec<BigRational>> {
    let n = game.n();
    if n > 9 {
        return Err(Error::CapExceeded { n, cap: 9 });
    }
    let mut totals = vec![0i64; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0i64;
    loop {
        let mut mask = 0u64;
        for &p in &perm {
            let before = value_of_mask(game, mask) as i64;
            mask |= 1 << p;
            totals[p] += value_of_mask(game, mask) as i64 - before;
        }
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let by_position = totals
        .into_iter()
        .map(|t| BigRational::new(t.into(), count.into()))
        .collect();
    Ok(game.to_id_order(by_position))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).unwrap_or(i);
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Number of coalitions for which a point is pivotal, with the direction of
/// the flip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotalCount {
    pub id: usize,
    pub count: BigUint,
    pub sign: i8,
}

impl PivotalCount {
    pub fn value(&self, n: usize) -> BigRational {
        let num = BigInt::from(self.count.clone()) * BigInt::from(self.sign);
        BigRational::new(num, BigInt::one() << (n - 1))
    }
}

pub fn pivotal_count(game: &PreparedGame, id: usize, opts: &Enumeration) -> Result<PivotalCount> {
    let n = game.n();
    if id >= n {
        return Err(Error::InvalidParameter(format!("no point with id {id}")));
    }
    opts.check(n)?;
    let pos = positions_by_id(game)[id];
    let table = value_table(game, opts.exec);
    let bit = 1u64 << pos;
    let (mut up, mut down) = (0u64, 0u64);
    for mask in (0..(1u64 << n)).filter(|m| m & bit == 0) {
        match (table[mask as usize], table[(mask | bit) as usize]) {
            (0, 1) => up += 1,
            (1, 0) => down += 1,
            _ => {}
        }
    }
    match (up, down) {
        (_, 0) => Ok(PivotalCount {
            id,
            count: up.into(),
            sign: if up == 0 && game.signed_weights[pos] < 0 {
                -1
            } else {
                1
            },
        }),
        (0, _) => Ok(PivotalCount {
            id,
            count: down.into(),
            sign: -1,
        }),
        _ => Err(Error::InvalidParameter(format!(
            "point {id} is pivotal in both directions ({up} raises, {down} lowers)"
        ))),
    }
}

/// Coalitions where a point flips the utility against its own sign: a
/// positive point turning 1 into 0, or a negative point turning 0 into 1.
/// Returned as `(id, coalition mask)`; empty for every well-formed game.
pub fn sign_rule_violations(game: &PreparedGame, opts: &Enumeration) -> Result<Vec<(usize, u64)>> {
    let n = game.n();
    opts.check(n)?;
    let table = value_table(game, opts.exec);
    let mut out = Vec::new();
    for pos in 0..n {
        let w = game.signed_weights[pos];
        let bit = 1u64 << pos;
        for mask in (0..(1u64 << n)).filter(|m| m & bit == 0) {
            let (before, after) = (table[mask as usize], table[(mask | bit) as usize]);
            if (w > 0 && before == 1 && after == 0) || (w < 0 && before == 0 && after == 1) {
                out.push((game.order[pos], mask));
            }
        }
    }
    Ok(out)
}
