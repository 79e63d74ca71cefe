//! Spectrum of the All-Pairs channel on `{I, Z}` strings.
//!
//! Within a sector of fixed `n_z` the channel spreads a string over strings at
//! swap distance `d` with amplitude `α_d`. The same channel is diagonal on the
//! two-row permutation irreps `λ = (V - λ₂, λ₂)` with eigenvalue `c_λ`, and the
//! integer matrix `G` links the two parametrisations: `G α = c`. The inverse
//! channel spreads with amplitudes `β` solving `G β = 1/c`.
//!
//! The channel commutes with the `Z ↔ I` relabelling, so a sector `n_z` has the
//! same spectrum as `V - n_z`. Everything here is computed in the reduced sector
//! `min(n_z, V - n_z)`, which keeps `G` square.

mod brute;
pub mod exact;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::combinatorics::{binomial, pairing_count_ratio, RatioProduct};
use crate::error::{Error, Result};

pub use brute::{brute_force_channel, delocalization_matrix, sector_strings, BruteChannel};

/// Largest reduced Z sector the estimator supports.
pub const MAX_NZ: usize = 14;

/// Tolerance for the closed-form vs `G·α` eigenvalue cross-check.
const EIGEN_AGREEMENT: f64 = 1e-10;

fn check_sector(v: usize, n_z: usize) {
    assert!(v.is_multiple_of(2), "volume {v} must be even");
    assert!(n_z <= v, "n_z={n_z} exceeds volume {v}");
}

/// `min(n_z, V - n_z)`.
pub fn reduced_sector(v: usize, n_z: usize) -> usize {
    n_z.min(v - n_z)
}

/// Weight that stays on the input string: `α_0^{V, n_z}`.
pub fn alpha0(v: usize, n_z: usize) -> f64 {
    check_sector(v, n_z);
    let k = reduced_sector(v, n_z);
    let rest = v - k;
    let mut total = 0.0;
    let mut m = k % 2;
    while m <= k {
        // (2/3)^m · C(k,m) m! · C(V-k,m) · |P_{k-m}| |P_{V-k-m}| / |P_V|
        let mut term = RatioProduct::new();
        for _ in 0..m {
            term.num(2.0).den(3.0);
        }
        term.falling(k, m)
            .binomial(rest, m)
            .push_pairing_ratio(&[k - m, rest - m], v);
        total += term.value();
        m += 2;
    }
    total
}

/// Swap amplitudes `α_d` for `d = 0..=n_z`; entries with `d > V - n_z` are zero.
pub fn alpha_vec(v: usize, n_z: usize) -> Vec<f64> {
    check_sector(v, n_z);
    (0..=n_z)
        .map(|d| {
            if d > v - n_z {
                return 0.0;
            }
            let mut pre = RatioProduct::new();
            for i in 1..=d {
                pre.num(i as f64).den(3.0);
            }
            pre.value() * pairing_count_ratio(v, 2 * d) * alpha0(v - 2 * d, n_z - d)
        })
        .collect()
}

/// Fraction of pairings that match every `a†` with an `a`: `n+! |P_{V-2n+}| / |P_V|`.
pub fn pairing_fraction(v: usize, n_plus: usize) -> f64 {
    assert!(v.is_multiple_of(2) && 2 * n_plus <= v);
    let mut acc = RatioProduct::new();
    for i in 2..=n_plus {
        acc.num(i as f64);
    }
    acc.value() * pairing_count_ratio(v, 2 * n_plus)
}

/// `G_{λ₂ d} = Σ_{x+y=d} (-1)^x C(λ₂,x) C(n_z-λ₂,y) C(V-n_z-λ₂,y)`.
///
/// Rows run over `λ₂ = 0..=min(n_z, V-n_z)`, columns over `d = 0..=n_z`.
/// Square whenever `n_z <= V/2`.
pub fn g_matrix(v: usize, n_z: usize) -> Vec<Vec<BigInt>> {
    check_sector(v, n_z);
    let rows = reduced_sector(v, n_z);
    (0..=rows)
        .map(|l2| (0..=n_z).map(|d| g_entry(v, n_z, l2, d)).collect())
        .collect()
}

fn g_entry(v: usize, n_z: usize, l2: usize, d: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for x in 0..=d.min(l2) {
        let y = d - x;
        let sym = binomial((n_z - l2) as u64, y as i64) * binomial((v - n_z - l2) as u64, y as i64);
        let term = BigInt::from(binomial(l2 as u64, x as i64) * sym);
        if x % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

fn g_to_f64(g: &[Vec<BigInt>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(g.len(), cols, |r, c| g[r][c].to_f64().unwrap_or(f64::NAN))
}

/// Closed-form channel eigenvalue on the irrep `(V - λ₂, λ₂)`.
pub fn eigenvalue_closed_form(v: usize, l2: usize) -> f64 {
    assert!(v.is_multiple_of(2) && 2 * l2 <= v);
    let mut total = 0.0;
    for d in 0..=l2 {
        let mut m = (l2 - d) % 2;
        while m <= l2 - d {
            let free = v - d - l2;
            let mut term = RatioProduct::new();
            for _ in 0..d {
                term.den(3.0);
            }
            for _ in 0..m {
                term.num(2.0).den(3.0);
            }
            term.falling(l2, d + m)
                .binomial(free, m)
                .push_pairing_ratio(&[l2 - d - m, free - m], v);
            let value = term.value();
            total += if d % 2 == 0 { value } else { -value };
            m += 2;
        }
    }
    total
}

/// Eigenvalues `c_{λ₂}` for `λ₂ = 0..=min(n_z, V-n_z)`.
///
/// Evaluated by the closed form and cross-checked against `G·α` in the
/// requested sector.
///
/// # Panics
/// If the two routes disagree beyond `1e-10` relative.
pub fn eigenvalues(v: usize, n_z: usize) -> Vec<f64> {
    check_sector(v, n_z);
    let k = reduced_sector(v, n_z);
    let closed: Vec<f64> = (0..=k).map(|l2| eigenvalue_closed_form(v, l2)).collect();
    let via_g = eigenvalues_from_alpha(v, n_z);
    for (l2, (a, b)) in closed.iter().zip(via_g.iter()).enumerate() {
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        assert!(
            (a - b).abs() <= EIGEN_AGREEMENT * scale,
            "eigenvalue routes disagree at V={v} n_z={n_z} λ₂={l2}: {a} vs {b}"
        );
    }
    closed
}

/// Eigenvalues in the requested sector as `G·α`, without the closed form.
pub fn eigenvalues_from_alpha(v: usize, n_z: usize) -> Vec<f64> {
    check_sector(v, n_z);
    let alpha = DVector::from_vec(alpha_vec(v, n_z));
    (g_to_f64(&g_matrix(v, n_z), n_z + 1) * alpha).iter().copied().collect()
}

/// Inverse swap amplitudes `β_d` for `d = 0..=min(n_z, V-n_z)`.
pub fn beta_vec(v: usize, n_z: usize) -> Result<Vec<f64>> {
    check_sector(v, n_z);
    let k = reduced_sector(v, n_z);
    let c = eigenvalues(v, k);
    solve_beta(v, k, &g_matrix(v, k), &c)
}

fn solve_beta(v: usize, k: usize, g: &[Vec<BigInt>], c: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = c.iter().find(|x| x.abs() < 1e-14) {
        return Err(Error::SingularChannel {
            volume: v,
            n_z: k,
            value: *bad,
        });
    }
    let rhs = DVector::from_iterator(k + 1, c.iter().map(|x| 1.0 / x));
    // columns scale like C(n_z,d) C(V-n_z,d); equilibrate by row λ₂ = 0
    let g = g_to_f64(g, k + 1);
    let scale: Vec<f64> = (0..=k).map(|d| g[(0, d)]).collect();
    let scaled = DMatrix::from_fn(k + 1, k + 1, |r, col| g[(r, col)] / scale[col]);
    let lu = scaled.clone().lu();
    let mut y = lu
        .solve(&rhs)
        .ok_or(Error::SingularChannel {
            volume: v,
            n_z: k,
            value: 0.0,
        })?;
    // one step of iterative refinement
    let r = &rhs - &scaled * &y;
    if let Some(dy) = lu.solve(&r) {
        y += dy;
    }
    let residual = (&scaled * &y - &rhs).amax();
    debug_assert!(
        residual < 1e-10 * rhs.amax(),
        "β residual {residual:e} at V={v} n_z={k}"
    );
    Ok((0..=k).map(|d| y[d] / scale[d]).collect())
}

/// `α`, `G`, `c` and `β` for one `(V', n_z)` sector.
#[derive(Debug, Clone)]
pub struct ChannelSpectrum {
    pub v_prime: usize,
    /// Sector the spectrum was built for; cached spectra are always reduced.
    pub n_z: usize,
    /// `min(n_z, V' - n_z)`; all vectors have this length plus one.
    pub reduced_n_z: usize,
    pub alpha: Vec<f64>,
    pub g: Vec<Vec<BigInt>>,
    pub c: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ChannelSpectrum {
    pub fn new(v_prime: usize, n_z: usize) -> Result<Self> {
        if v_prime % 2 == 1 {
            return Err(Error::OddVolume(v_prime));
        }
        if n_z > v_prime {
            return Err(Error::InvalidArgument(format!(
                "n_z={n_z} exceeds volume {v_prime}"
            )));
        }
        let k = reduced_sector(v_prime, n_z);
        if k > MAX_NZ {
            return Err(Error::SectorTooLarge { n_z: k, max: MAX_NZ });
        }
        let alpha = alpha_vec(v_prime, k);
        let g = g_matrix(v_prime, k);
        let c = eigenvalues(v_prime, k);
        let beta = solve_beta(v_prime, k, &g, &c)?;
        Ok(Self {
            v_prime,
            n_z,
            reduced_n_z: k,
            alpha,
            g,
            c,
            beta,
        })
    }

    /// Row `λ₂ = 0` of `G`: the number of strings at each swap distance.
    pub fn shell_sizes(&self) -> Vec<f64> {
        self.g[0].iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Memoised spectra keyed by `(V', reduced n_z)`. Safe to share across threads.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    inner: RwLock<HashMap<(usize, usize), Arc<ChannelSpectrum>>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v_prime: usize, n_z: usize) -> Result<Arc<ChannelSpectrum>> {
        if v_prime % 2 == 1 {
            return Err(Error::OddVolume(v_prime));
        }
        let key = (v_prime, reduced_sector(v_prime, n_z.min(v_prime)));
        if let Some(s) = self.inner.read().expect("spectrum cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let spectrum = Arc::new(ChannelSpectrum::new(key.0, key.1)?);
        let mut w = self.inner.write().expect("spectrum cache poisoned");
        Ok(Arc::clone(w.entry(key).or_insert(spectrum)))
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("spectrum cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Irrep dimension `C(V, λ₂) - C(V, λ₂ - 1)`.
pub fn irrep_dimension(v: usize, l2: usize) -> usize {
    let hi = binomial(v as u64, l2 as i64);
    let lo = binomial(v as u64, l2 as i64 - 1);
    (hi - lo).to_usize().unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha0_values() {
        for v in (2..=40).step_by(2) {
            assert_relative_eq!(alpha0(v, 0), 1.0, epsilon = 1e-15);
            assert_relative_eq!(alpha0(v, v), 1.0, epsilon = 1e-15);
        }
        assert_relative_eq!(alpha0(2, 1), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(alpha0(4, 1), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_vec_values() {
        let a = alpha_vec(4, 1);
        assert_relative_eq!(a[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(a[1], 1.0 / 9.0, epsilon = 1e-15);
        let a = alpha_vec(2, 1);
        assert_relative_eq!(a[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(a[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(alpha_vec(10, 0), vec![1.0]);
    }

    #[test]
    fn alpha_conserves_total_amplitude() {
        for v in (2..=64).step_by(2) {
            for n_z in 0..=v.min(16) {
                let a = alpha_vec(v, n_z);
                let g0: Vec<f64> = g_matrix(v, n_z)[0]
                    .iter()
                    .map(|x| x.to_f64().unwrap())
                    .collect();
                let total: f64 = a.iter().zip(&g0).map(|(x, y)| x * y).sum();
                assert!(a.iter().all(|x| *x >= 0.0));
                assert!((total - 1.0).abs() < 1e-12, "v={v} n_z={n_z} total={total}");
            }
        }
    }

    #[test]
    fn g_matrix_values() {
        let as_i64 = |g: Vec<Vec<BigInt>>| -> Vec<Vec<i64>> {
            g.into_iter()
                .map(|r| r.into_iter().map(|x| x.to_i64().unwrap()).collect())
                .collect()
        };
        assert_eq!(as_i64(g_matrix(2, 1)), vec![vec![1, 1], vec![1, -1]]);
        assert_eq!(as_i64(g_matrix(4, 1)), vec![vec![1, 3], vec![1, -1]]);
        for v in (2..=16).step_by(2) {
            for n_z in 0..=v / 2 {
                let g = g_matrix(v, n_z);
                for d in 0..=n_z {
                    assert_eq!(
                        g[0][d],
                        BigInt::from(binomial(n_z as u64, d as i64) * binomial((v - n_z) as u64, d as i64))
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalue_values() {
        assert_relative_eq!(eigenvalues(2, 1)[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(eigenvalues(4, 1)[1], 5.0 / 9.0, epsilon = 1e-15);
        for v in (2..=30).step_by(2) {
            for n_z in 0..=v {
                assert_relative_eq!(eigenvalues(v, n_z)[0], 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn eigenvalue_routes_agree_at_large_volume() {
        for &v in &[64usize, 256, 1024] {
            for n_z in 0..=MAX_NZ {
                eigenvalues(v, n_z);
            }
        }
    }

    #[test]
    fn eigenvalues_approach_large_volume_limit() {
        for l2 in 1..=4 {
            let gap = (eigenvalue_closed_form(4096, l2) - (2.0f64 / 3.0).powi(l2 as i32)).abs();
            assert!(gap < 5e-3, "λ₂={l2} gap={gap}");
        }
    }

    #[test]
    fn beta_values() {
        let b = beta_vec(2, 1).unwrap();
        assert_relative_eq!(b[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(b[1], -1.0, epsilon = 1e-12);
        let b = beta_vec(4, 1).unwrap();
        assert_relative_eq!(b[0], 8.0 / 5.0, epsilon = 1e-12);
        assert_relative_eq!(b[1], -1.0 / 5.0, epsilon = 1e-12);
        assert_eq!(beta_vec(12, 0).unwrap(), vec![1.0]);
        // mirrored sector
        assert_eq!(beta_vec(4, 3).unwrap(), beta_vec(4, 1).unwrap());
    }

    #[test]
    fn beta_residual_small_up_to_cap() {
        for &v in &[32usize, 128, 512] {
            for n_z in 0..=MAX_NZ {
                let g = g_to_f64(&g_matrix(v, n_z), n_z + 1);
                let c = eigenvalues(v, n_z);
                let b = DVector::from_vec(beta_vec(v, n_z).unwrap());
                let r = g * b;
                for (l2, x) in r.iter().enumerate() {
                    let want = 1.0 / c[l2];
                    assert!(
                        (x - want).abs() < 1e-10 * want.abs().max(1.0),
                        "v={v} n_z={n_z} λ₂={l2}: {x} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn pairing_fraction_values() {
        assert_eq!(pairing_fraction(10, 0), 1.0);
        assert_relative_eq!(pairing_fraction(4, 1), 1.0 / 3.0, epsilon = 1e-16);
        assert_relative_eq!(pairing_fraction(6, 1), 1.0 / 5.0, epsilon = 1e-16);
        assert_relative_eq!(pairing_fraction(16, 2), 2.0 / (15.0 * 13.0), epsilon = 1e-16);
    }

    #[test]
    fn pairing_fraction_matches_enumeration() {
        use crate::combinatorics::all_pairings;
        for v in [4usize, 6, 8] {
            let all = all_pairings(v).unwrap();
            // raise at 0 and 2, lower at 1 and 3
            for n_plus in 1..=2 {
                let raise: Vec<usize> = (0..n_plus).map(|k| 2 * k).collect();
                let good = all
                    .iter()
                    .filter(|p| {
                        p.iter().all(|(i, j)| {
                            let ri = raise.contains(i);
                            let rj = raise.contains(j);
                            let li = !ri && *i < 2 * n_plus;
                            let lj = !rj && *j < 2 * n_plus;
                            // a ladder site must pair raise with lower
                            if ri || rj || li || lj {
                                (ri && lj) || (rj && li)
                            } else {
                                true
                            }
                        })
                    })
                    .count();
                let f = good as f64 / all.len() as f64;
                assert_relative_eq!(pairing_fraction(v, n_plus), f, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn cache_reuses_entries() {
        let cache = SpectrumCache::new();
        let a = cache.get(12, 2).unwrap();
        let b = cache.get(12, 10).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
        assert!(matches!(
            cache.get(64, 20),
            Err(Error::SectorTooLarge { n_z: 20, .. })
        ));
    }

    #[test]
    fn irrep_dimensions_sum_to_sector_size() {
        for v in (2..=12).step_by(2) {
            for n_z in 0..=v {
                let k = reduced_sector(v, n_z);
                let total: usize = (0..=k).map(|l2| irrep_dimension(v, l2)).sum();
                assert_eq!(
                    total as u64,
                    crate::combinatorics::binomial_small(v, n_z)
                );
            }
        }
    }
}
