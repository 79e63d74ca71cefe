//! Rational-arithmetic versions of the channel quantities.
//!
//! Slow, but exact; used to check the floating-point routines for small volumes.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::combinatorics::{binomial, pairing_count, BigRatio};

use super::{g_matrix, reduced_sector};

fn int(x: impl Into<BigInt>) -> BigRatio {
    BigRatio::from_integer(x.into())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn pairings(v: usize) -> BigRatio {
    int(pairing_count(v).expect("even volume"))
}

fn pow(base: &BigRatio, e: usize) -> BigRatio {
    (0..e).fold(BigRatio::one(), |acc, _| acc * base)
}

/// Exact `α_0^{V, n_z}`.
pub fn alpha0(v: usize, n_z: usize) -> BigRatio {
    let two_thirds = BigRatio::new(2.into(), 3.into());
    let mut total = BigRatio::zero();
    let mut m = n_z % 2;
    while m <= n_z.min(v - n_z) {
        let t = pow(&two_thirds, m)
            * int(binomial(n_z as u64, m as i64))
            * int(binomial((v - n_z) as u64, m as i64))
            * int(factorial(m))
            * pairings(n_z - m)
            * pairings(v - n_z - m)
            / pairings(v);
        total += t;
        m += 2;
    }
    total
}

/// Exact `α_d` for `d = 0..=n_z`.
pub fn alpha_vec(v: usize, n_z: usize) -> Vec<BigRatio> {
    let third = BigRatio::new(1.into(), 3.into());
    (0..=n_z)
        .map(|d| {
            if d > v - n_z {
                return BigRatio::zero();
            }
            pow(&third, d) * int(factorial(d)) * pairings(v - 2 * d) / pairings(v)
                * alpha0(v - 2 * d, n_z - d)
        })
        .collect()
}

/// Exact eigenvalues through `G α`.
pub fn eigenvalues(v: usize, n_z: usize) -> Vec<BigRatio> {
    let alpha = alpha_vec(v, n_z);
    g_matrix(v, n_z)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(&alpha)
                .fold(BigRatio::zero(), |acc, (g, a)| acc + int(g) * a)
        })
        .collect()
}

/// Exact eigenvalue from the closed-form sum.
pub fn eigenvalue_closed_form(v: usize, l2: usize) -> BigRatio {
    let third = BigRatio::new((-1).into(), 3.into());
    let two_thirds = BigRatio::new(2.into(), 3.into());
    let mut total = BigRatio::zero();
    for d in 0..=l2 {
        let mut m = (l2 - d) % 2;
        while m <= l2 - d {
            let free = v - d - l2;
            total += pow(&third, d)
                * pow(&two_thirds, m)
                * BigRatio::new(factorial(l2), factorial(l2 - d - m))
                * int(binomial(free as u64, m as i64))
                * pairings(l2 - d - m)
                * pairings(free - m)
                / pairings(v);
            m += 2;
        }
    }
    total
}

/// Exact `β`, by Gaussian elimination on the square reduced-sector `G`.
///
/// Returns `None` when an eigenvalue vanishes.
pub fn beta_vec(v: usize, n_z: usize) -> Option<Vec<BigRatio>> {
    let k = reduced_sector(v, n_z);
    let c = eigenvalues(v, k);
    if c.iter().any(|x| x.is_zero()) {
        return None;
    }
    let mut a: Vec<Vec<BigRatio>> = g_matrix(v, k)
        .into_iter()
        .zip(&c)
        .map(|(row, ci)| {
            let mut r: Vec<BigRatio> = row.into_iter().map(int).collect();
            r.push(ci.recip());
            r
        })
        .collect();
    let n = k + 1;
    for col in 0..n {
        let pivot = (col..n).find(|r| !a[*r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=n {
                    let delta = &f * &a[col][j];
                    a[r][j] -= delta;
                }
            }
        }
    }
    Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Exact `n+! |P_{V-2n+}| / |P_V|`.
pub fn pairing_fraction(v: usize, n_plus: usize) -> BigRatio {
    int(factorial(n_plus)) * pairings(v - 2 * n_plus) / pairings(v)
}

/// Largest relative deviation of `approx` from `exact`, entrywise.
pub fn max_relative_error(approx: &[f64], exact: &[BigRatio]) -> f64 {
    approx
        .iter()
        .zip(exact)
        .map(|(a, e)| {
            let e = ratio_to_f64(e);
            if e == 0.0 {
                a.abs()
            } else {
                ((a - e) / e).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Nearest float to a rational.
pub fn ratio_to_f64(x: &BigRatio) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(f) = x.to_f64() {
        if f.is_finite() {
            return f;
        }
    }
    // scale both parts down to fit
    let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
    let n = (x.numer().abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (x.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let v = n / d;
    if x.is_negative() {
        -v
    } else {
        v
    }
}
