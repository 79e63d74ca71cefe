//! Exact and floating-point combinatorial primitives.
//!
//! Ratios of double factorials grow far beyond the `f64` range for the
//! volumes we care about, so every such ratio is accumulated as a product
//! of factors that are close to one. The exact [`BigRatio`] routines exist
//! for oracles on small volumes.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact rational in lowest terms with positive denominator.
pub type BigRatio = BigRational;

/// Largest volume supported by the `u64` bit-pattern helpers.
pub const MAX_BITS: usize = 64;

/// Exact binomial coefficient; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient in `u128`, `None` on overflow.
pub fn binomial_u128(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial coefficient as a float.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_exact()
}

trait RoundIfExact {
    fn round_if_exact(self) -> Self;
}

impl RoundIfExact for f64 {
    // Integers below 2^53 are representable; snap accumulated rounding.
    fn round_if_exact(self) -> f64 {
        if self.abs() < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// Binomial with a possibly negative upper argument, zero in that case.
pub fn binomial_signed_f64(n: i64, k: usize) -> f64 {
    if n < 0 {
        0.0
    } else {
        binomial_f64(n as usize, k)
    }
}

/// Number of perfect matchings of `v` sites, `(v-1)!!`.
pub fn pairing_count(v: usize) -> Result<BigUint> {
    if v % 2 == 1 {
        return Err(Error::OddVolume(v));
    }
    Ok(pairing_count_unchecked(v))
}

fn pairing_count_unchecked(v: usize) -> BigUint {
    let mut acc = BigUint::one();
    let mut j = 1usize;
    while j < v {
        acc *= j;
        j += 2;
    }
    acc
}

/// `|P_{v-drop}| / |P_v|`, i.e. `1 / ((v-1)(v-3)...(v-drop+1))`.
///
/// # Panics
/// If `v` or `drop` is odd, or `drop > v`.
pub fn pairing_count_ratio(v: usize, drop: usize) -> f64 {
    assert!(v.is_multiple_of(2) && drop.is_multiple_of(2) && drop <= v);
    let mut acc = RatioProduct::new();
    let mut j = v - drop + 1;
    while j < v {
        acc.den(j as f64);
        j += 2;
    }
    acc.value()
}

/// Exact `|P_{v-drop}| / |P_v|`.
pub fn pairing_count_ratio_exact(v: usize, drop: usize) -> BigRatio {
    assert!(v.is_multiple_of(2) && drop.is_multiple_of(2) && drop <= v);
    BigRatio::new(
        pairing_count_unchecked(v - drop).into(),
        pairing_count_unchecked(v).into(),
    )
}

/// `Π_k |P_{parts[k]}| / |P_total|` evaluated without materialising any
/// double factorial.
///
/// The largest part is cancelled against the denominator first, so the
/// number of factors is `(total - max_part)/2 + Σ_other parts/2`.
pub fn pairing_product_ratio(parts: &[usize], total: usize) -> f64 {
    let mut acc = RatioProduct::new();
    acc.push_pairing_ratio(parts, total);
    acc.value()
}

/// Product of float factors, split into numerator and denominator lists and
/// multiplied in an interleaved order so intermediate values stay near one.
#[derive(Debug, Clone, Default)]
pub struct RatioProduct {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RatioProduct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, x: f64) -> &mut Self {
        self.num.push(x);
        self
    }

    pub fn den(&mut self, x: f64) -> &mut Self {
        self.den.push(x);
        self
    }

    /// Multiply by `n (n-1) ... (n-k+1)`.
    pub fn falling(&mut self, n: usize, k: usize) -> &mut Self {
        for i in 0..k {
            self.num((n - i) as f64);
        }
        self
    }

    /// Divide by `k!`.
    pub fn over_factorial(&mut self, k: usize) -> &mut Self {
        for i in 2..=k {
            self.den(i as f64);
        }
        self
    }

    /// Multiply by `C(n, k)`; `k > n` gives zero.
    pub fn binomial(&mut self, n: usize, k: usize) -> &mut Self {
        if k > n {
            self.num(0.0);
            return self;
        }
        let k = k.min(n - k);
        self.falling(n, k).over_factorial(k)
    }

    /// Multiply by `Π|P_part| / |P_total|`.
    pub fn push_pairing_ratio(&mut self, parts: &[usize], total: usize) -> &mut Self {
        debug_assert!(parts.iter().all(|p| p % 2 == 0) && total.is_multiple_of(2));
        debug_assert!(parts.iter().sum::<usize>() <= total);
        let (imax, &max) = match parts.iter().enumerate().max_by_key(|(_, p)| **p) {
            Some(x) => x,
            None => (usize::MAX, &0),
        };
        // |P_total| / |P_max| = (max+1)(max+3)...(total-1)
        let mut j = max + 1;
        while j < total {
            self.den(j as f64);
            j += 2;
        }
        for (i, &p) in parts.iter().enumerate() {
            if i == imax {
                continue;
            }
            let mut j = 1;
            while j < p {
                self.num(j as f64);
                j += 2;
            }
        }
        self
    }

    pub fn value(&self) -> f64 {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        if num.contains(&0.0) {
            return 0.0;
        }
        num.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        den.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let mut acc: f64 = 1.0;
        let (mut i, mut j) = (0, 0);
        while i < num.len() || j < den.len() {
            // keep |acc| close to 1: divide when above, multiply when below
            if j < den.len() && (i >= num.len() || acc.abs() >= 1.0) {
                acc /= den[j];
                j += 1;
            } else {
                acc *= num[i];
                i += 1;
            }
        }
        acc
    }
}

/// Enumerate every perfect matching of `v` sites, pairs as `(i, j)` with `i < j`.
pub fn all_pairings(v: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if v % 2 == 1 {
        return Err(Error::OddVolume(v));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(v / 2);
    let free: Vec<usize> = (0..v).collect();
    pairings_rec(&free, &mut current, &mut out);
    Ok(out)
}

fn pairings_rec(
    free: &[usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if free.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = free[0];
    for k in 1..free.len() {
        let rest: Vec<usize> = free[1..]
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != k)
            .map(|(_, &s)| s)
            .collect();
        current.push((first, free[k]));
        pairings_rec(&rest, current, out);
        current.pop();
    }
}

/// Check the two counts of number-conserving operator strings agree and
/// return their common value, `C(2V, V)`.
///
/// # Panics
/// If the string count and the sector-sum count differ.
pub fn operator_basis_count(v: usize) -> BigUint {
    assert!(v >= 1);
    let mut by_strings = BigUint::zero();
    for n_plus in 0..=v / 2 {
        by_strings += binomial(v as u64, 2 * n_plus as i64)
            * binomial(2 * n_plus as u64, n_plus as i64)
            * (BigUint::one() << (v - 2 * n_plus));
    }
    let by_sectors = binomial(2 * v as u64, v as i64);
    assert_eq!(
        by_strings, by_sectors,
        "operator basis counts disagree at V={v}"
    );
    by_sectors
}

fn binomial_table() -> &'static [[u64; MAX_BITS + 1]; MAX_BITS + 1] {
    static TABLE: OnceLock<Box<[[u64; MAX_BITS + 1]; MAX_BITS + 1]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0u64; MAX_BITS + 1]; MAX_BITS + 1]);
        for n in 0..=MAX_BITS {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1].saturating_add(t[n - 1][k]);
            }
        }
        t
    })
}

/// `C(n, k)` from a cached table, `n <= 64`.
#[inline]
pub fn binomial_small(n: usize, k: usize) -> u64 {
    if k > n {
        0
    } else {
        binomial_table()[n][k]
    }
}

/// Colexicographic rank of an occupation pattern among patterns with the same popcount.
#[inline]
pub fn rank(bits: u64) -> u64 {
    let table = binomial_table();
    let mut r = 0;
    let mut rest = bits;
    let mut k = 1;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        r += table[p][k];
        rest &= rest - 1;
        k += 1;
    }
    r
}

/// Inverse of [`rank`] for `n` particles on `v` sites.
///
/// # Panics
/// If `index >= C(v, n)` or `v > 64`.
pub fn unrank(v: usize, n: usize, index: u64) -> u64 {
    assert!(v <= MAX_BITS && n <= v);
    assert!(index < binomial_small(v, n), "rank {index} out of range");
    let table = binomial_table();
    let mut bits = 0u64;
    let mut rest = index;
    let mut hi = v;
    for k in (1..=n).rev() {
        // largest p < hi with C(p, k) <= rest
        let mut p = hi - 1;
        while table[p][k] > rest {
            p -= 1;
        }
        bits |= 1 << p;
        rest -= table[p][k];
        hi = p;
    }
    bits
}

/// An `N`-subset of `V` sites together with its colexicographic rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RankedCombination {
    pub volume: usize,
    pub occupancy: usize,
    pub rank: u64,
    pub bits: u64,
}

impl RankedCombination {
    pub fn from_bits(volume: usize, bits: u64) -> Self {
        debug_assert!(volume == MAX_BITS || bits >> volume == 0);
        Self {
            volume,
            occupancy: bits.count_ones() as usize,
            rank: rank(bits),
            bits,
        }
    }

    pub fn from_rank(volume: usize, occupancy: usize, rank: u64) -> Self {
        Self {
            volume,
            occupancy,
            rank,
            bits: unrank(volume, occupancy, rank),
        }
    }
}

/// All `k`-subsets of `0..n` as bit masks, in increasing numeric order.
pub fn subset_masks(n: usize, k: usize) -> SubsetMasks {
    assert!(n < 64);
    SubsetMasks {
        next: if k > n { None } else { Some((1u64 << k) - 1) },
        limit: 1u64 << n,
    }
}

#[derive(Debug, Clone)]
pub struct SubsetMasks {
    next: Option<u64>,
    limit: u64,
}

impl Iterator for SubsetMasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    }
}
