//! Sum over Z placements on the identity-only columns of a sample.
//!
//! On a column with outcome `b_i b_j`, zero Zs give 1, one Z gives
//! `⟨Z_i⟩ + ⟨Z_j⟩ ∈ {2, 0, -2}` and two Zs give `(-1)^{b_i + b_j}`, whatever the
//! gate. The sum over all placements of `k_b` Zs therefore depends only on how
//! many columns show each outcome.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::combinatorics::{binomial, binomial_u128, subset_masks};
use crate::gates::{pair_expectation, TwoBodyGate};
use crate::opstrings::Letter;
use crate::C64;

/// Column counts by measured pattern `(b_i, b_j)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ColumnCensus {
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl ColumnCensus {
    pub fn columns(&self) -> usize {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn add(&mut self, b_i: bool, b_j: bool) {
        match (b_i, b_j) {
            (false, false) => self.n00 += 1,
            (false, true) => self.n01 += 1,
            (true, false) => self.n10 += 1,
            (true, true) => self.n11 += 1,
        }
    }

    pub fn remove(&mut self, b_i: bool, b_j: bool) {
        match (b_i, b_j) {
            (false, false) => self.n00 -= 1,
            (false, true) => self.n01 -= 1,
            (true, false) => self.n10 -= 1,
            (true, true) => self.n11 -= 1,
        }
    }

    pub fn from_columns(columns: &[(bool, bool)]) -> Self {
        let mut c = Self::default();
        for &(a, b) in columns {
            c.add(a, b);
        }
        c
    }
}

/// `Σ_m P(m) · Q(k_b - 2m)` where `m` counts doubly-occupied columns.
///
/// `P(m) = Σ_{x+y=m} (-1)^y C(N00+N11-(k_b-2m), x) C(N01+N10, y)` places the
/// `ZZ` columns, `Q(s) = Σ_{x+y=s} 2^s (-1)^y C(N00, x) C(N11, y)` the single Zs.
pub fn h_function(census: &ColumnCensus, k_b: usize) -> f64 {
    h_exact_i128(census, k_b)
        .map(|x| x as f64)
        .unwrap_or_else(|| h_exact_big(census, k_b).to_f64().unwrap_or(f64::NAN))
}

fn h_exact_i128(c: &ColumnCensus, k_b: usize) -> Option<i128> {
    let same = c.n00 + c.n11;
    let mixed = c.n01 + c.n10;
    let b = |n: usize, k: usize| binomial_u128(n, k).and_then(|x| i128::try_from(x).ok());
    let mut total: i128 = 0;
    for m in 0..=k_b / 2 {
        let singles = k_b - 2 * m;
        if singles > same {
            continue;
        }
        let mut pair_part: i128 = 0;
        for y in 0..=m {
            let t = b(same - singles, m - y)?.checked_mul(b(mixed, y)?)?;
            pair_part = if y % 2 == 0 { pair_part.checked_add(t)? } else { pair_part.checked_sub(t)? };
        }
        let mut single_part: i128 = 0;
        for y in 0..=singles {
            let t = b(c.n00, singles - y)?.checked_mul(b(c.n11, y)?)?;
            single_part = if y % 2 == 0 { single_part.checked_add(t)? } else { single_part.checked_sub(t)? };
        }
        let scale = 1i128.checked_shl(singles as u32)?;
        total = total.checked_add(pair_part.checked_mul(single_part)?.checked_mul(scale)?)?;
    }
    Some(total)
}

fn h_exact_big(c: &ColumnCensus, k_b: usize) -> BigInt {
    let same = c.n00 + c.n11;
    let mixed = c.n01 + c.n10;
    let b = |n: usize, k: usize| BigInt::from(binomial(n as u64, k as i64));
    let mut total = BigInt::from(0);
    for m in 0..=k_b / 2 {
        let singles = k_b - 2 * m;
        if singles > same {
            continue;
        }
        let mut pair_part = BigInt::from(0);
        for y in 0..=m {
            let t = b(same - singles, m - y) * b(mixed, y);
            if y % 2 == 0 {
                pair_part += t;
            } else {
                pair_part -= t;
            }
        }
        let mut single_part = BigInt::from(0);
        for y in 0..=singles {
            let t = b(c.n00, singles - y) * b(c.n11, y);
            if y % 2 == 0 {
                single_part += t;
            } else {
                single_part -= t;
            }
        }
        total += pair_part * single_part * (BigInt::from(1) << singles);
    }
    total
}

/// Coefficient of `x^{k_b}` in `(1+x)^{2 N00} (1-x)^{2 N11} (1-x²)^{N01+N10}`.
pub fn h_generating(census: &ColumnCensus, k_b: usize) -> BigInt {
    let mut poly = vec![BigInt::from(1)];
    let mut times = |factor: &[i64], count: usize| {
        for _ in 0..count {
            let mut next = vec![BigInt::from(0); poly.len() + factor.len() - 1];
            for (i, p) in poly.iter().enumerate() {
                for (j, f) in factor.iter().enumerate() {
                    next[i + j] += p * f;
                }
            }
            poly = next;
        }
    };
    times(&[1, 2, 1], census.n00);
    times(&[1, -2, 1], census.n11);
    times(&[1, 0, -1], census.n01 + census.n10);
    poly.get(k_b).cloned().unwrap_or_default()
}

/// Direct sum over every placement of `k_b` Zs on explicit columns.
///
/// `columns[c]` is the measured pattern of column `c` and `gates[c]` its gate.
///
/// # Panics
/// If there are more than 16 columns or `k_b > 8`.
pub fn h_bruteforce(columns: &[(bool, bool)], gates: &[TwoBodyGate], k_b: usize) -> f64 {
    assert!(columns.len() <= 16 && k_b <= 8 && gates.len() == columns.len());
    let sites = 2 * columns.len();
    // value of each column for the four Z placements on it, indexed by bits (i, j)
    let tables: Vec<[C64; 4]> = columns
        .iter()
        .zip(gates)
        .map(|(&(b_i, b_j), g)| {
            let l = |z: bool| if z { Letter::Z } else { Letter::Identity };
            std::array::from_fn(|m| pair_expectation(g, b_i, b_j, l(m & 1 == 1), l(m & 2 == 2)))
        })
        .collect();
    let mut total = 0.0;
    for mask in subset_masks(sites, k_b) {
        let mut prod = C64::new(1.0, 0.0);
        for (c, t) in tables.iter().enumerate() {
            prod *= t[((mask >> (2 * c)) & 3) as usize];
        }
        total += prod.re;
    }
    total
}
