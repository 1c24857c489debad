//! Counting arithmetic shared by the exact engines.
//!
//! Subset counts restricted to sizes `<= k` stay polynomial in `n` and fit a
//! `u128` for all practical `(n, k)`; counts that include free tails reach
//! `2^(n-1)` and are always [`BigUint`]. The [`Count`] trait lets the dynamic
//! programs run their bounded layers on either representation.

use std::ops::AddAssign;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

pub trait Count: Clone + Send + Sync + Zero + One + for<'a> AddAssign<&'a Self> + 'static {
    fn to_biguint(&self) -> BigUint;
    /// Little-endian 64-bit limbs of the value.
    fn limbs(&self) -> Vec<u64>;
    fn mul_big(&self, big: &BigUint) -> BigUint;
    fn mul_count(&self, other: &Self) -> Self;
}

impl Count for u128 {
    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }

    fn limbs(&self) -> Vec<u64> {
        vec![*self as u64, (*self >> 64) as u64]
    }

    fn mul_big(&self, big: &BigUint) -> BigUint {
        big * *self
    }

    fn mul_count(&self, other: &Self) -> Self {
        self * other
    }
}

impl Count for BigUint {
    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn limbs(&self) -> Vec<u64> {
        self.to_u64_digits()
    }

    fn mul_big(&self, big: &BigUint) -> BigUint {
        big * self
    }

    fn mul_count(&self, other: &Self) -> Self {
        self * other
    }
}

/// `C(n, k)` by the multiplicative recurrence `C(n, j+1) = C(n, j) (n-j) / (j+1)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

pub fn pow2(exp: u64) -> BigUint {
    BigUint::one() << exp
}

/// Whether every count of subsets of size `<= k` drawn from `n` points fits
/// comfortably in a `u128` (with headroom for sums of such counts).
pub fn bounded_counts_fit_u128(n: usize, k: usize) -> bool {
    let n = n as u64;
    let mut total = BigUint::zero();
    let mut term = BigUint::one();
    for s in 0..=(k as u64).min(n) {
        total += &term;
        term = term * (n - s) / (s + 1);
    }
    total.bits() <= 120
}

/// Non-negative integer accumulator specialised for adding small values at
/// large bit offsets, e.g. `x * 2^(n-m)`, in time proportional to the size of
/// `x` rather than the size of the running total.
#[derive(Debug, Clone, Default)]
pub struct ShiftAccumulator {
    limbs: Vec<u64>,
}

impl ShiftAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// `self += value * 2^shift`.
    pub fn add_shifted<C: Count>(&mut self, value: &C, shift: usize) {
        let digits = value.limbs();
        let word = shift / 64;
        let bit = (shift % 64) as u32;
        let mut shifted = Vec::with_capacity(digits.len() + 1);
        if bit == 0 {
            shifted.extend_from_slice(&digits);
        } else {
            let mut carry = 0u64;
            for &d in &digits {
                shifted.push((d << bit) | carry);
                carry = d >> (64 - bit);
            }
            shifted.push(carry);
        }
        while shifted.last() == Some(&0) {
            shifted.pop();
        }
        if shifted.is_empty() {
            return;
        }
        let needed = word + shifted.len() + 1;
        if self.limbs.len() < needed {
            self.limbs.resize(needed, 0);
        }
        let mut carry = false;
        let mut idx = word;
        for &d in &shifted {
            let (s1, c1) = self.limbs[idx].overflowing_add(d);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            self.limbs[idx] = s2;
            carry = c1 || c2;
            idx += 1;
        }
        while carry {
            if idx == self.limbs.len() {
                self.limbs.push(0);
            }
            let (s, c) = self.limbs[idx].overflowing_add(1);
            self.limbs[idx] = s;
            carry = c;
            idx += 1;
        }
    }

    pub fn into_biguint(self) -> BigUint {
        let mut digits = Vec::with_capacity(self.limbs.len() * 2);
        for limb in self.limbs {
            digits.push(limb as u32);
            digits.push((limb >> 32) as u32);
        }
        BigUint::new(digits)
    }
}

/// Natural number as little-endian 64-bit limbs without trailing zero limbs.
///
/// Supports only what the shared-table sweep needs, all in place: addition,
/// adding a power of two, and multiply-accumulate by a short coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Limbs(Vec<u64>);

impl Limbs {
    fn propagate(&mut self, mut idx: usize, mut carry: u64) {
        while carry != 0 {
            if idx == self.0.len() {
                self.0.push(carry);
                return;
            }
            let (s, c) = self.0[idx].overflowing_add(carry);
            self.0[idx] = s;
            carry = c as u64;
            idx += 1;
        }
    }

    fn trim(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    /// `self += 2^exp`.
    pub fn add_pow2(&mut self, exp: u64) {
        let word = (exp / 64) as usize;
        if self.0.len() <= word {
            self.0.resize(word + 1, 0);
        }
        self.propagate(word, 0);
        let bit = 1u64 << (exp % 64);
        let (s, c) = self.0[word].overflowing_add(bit);
        self.0[word] = s;
        self.propagate(word + 1, c as u64);
    }

    /// `self += x * coefficient`, the coefficient given as little-endian limbs.
    pub fn mul_add(&mut self, x: &Limbs, coefficient: &[u64]) {
        if x.0.is_empty() {
            return;
        }
        for (offset, &c) in coefficient.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let needed = x.0.len() + offset;
            if self.0.len() < needed {
                self.0.resize(needed, 0);
            }
            let mut carry = 0u128;
            for (acc, &d) in self.0[offset..needed].iter_mut().zip(&x.0) {
                let t = *acc as u128 + d as u128 * c as u128 + carry;
                *acc = t as u64;
                carry = t >> 64;
            }
            self.propagate(needed, carry as u64);
        }
        self.trim();
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut digits = Vec::with_capacity(self.0.len() * 2);
        for &limb in &self.0 {
            digits.push(limb as u32);
            digits.push((limb >> 32) as u32);
        }
        BigUint::new(digits)
    }
}

impl<'a> AddAssign<&'a Limbs> for Limbs {
    fn add_assign(&mut self, rhs: &'a Limbs) {
        if rhs.0.len() > self.0.len() {
            self.0.resize(rhs.0.len(), 0);
        }
        let mut carry = false;
        for (a, &b) in self.0.iter_mut().zip(&rhs.0) {
            let (s1, c1) = a.overflowing_add(b);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *a = s2;
            carry = c1 | c2;
        }
        self.propagate(rhs.0.len(), carry as u64);
    }
}

impl std::ops::Add for Limbs {
    type Output = Limbs;

    fn add(mut self, rhs: Limbs) -> Limbs {
        self += &rhs;
        self
    }
}

impl Zero for Limbs {
    fn zero() -> Self {
        Limbs(Vec::new())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// `x * 2^exp` without intermediate overflow or premature underflow.
pub fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

/// Nearest-ish `f64` to `numerator / 2^log2_den`: the magnitude is truncated
/// to 64 significant bits before one rounding to 53, so the result is within
/// one ulp of the exact quotient.
pub fn dyadic_to_f64(numerator: &BigInt, log2_den: u64) -> f64 {
    let (sign, mag) = (numerator.sign(), numerator.magnitude());
    if sign == Sign::NoSign {
        return 0.0;
    }
    let bits = mag.bits();
    let (head, shift) = if bits > 64 {
        ((mag >> (bits - 64)).to_u64().unwrap_or(u64::MAX), bits - 64)
    } else {
        (mag.to_u64().unwrap_or(u64::MAX), 0)
    };
    let v = ldexp(head as f64, shift as i64 - log2_den as i64);
    if sign == Sign::Minus {
        -v
    } else {
        v
    }
}
