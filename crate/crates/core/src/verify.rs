//! Self-checks against independent oracles, with measured errors.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::channel::{
    self, alpha_vec, beta_vec, brute_force_channel, delocalization_matrix, irrep_dimension,
    reduced_sector, SpectrumCache,
};
use crate::combinatorics::all_pairings;
use crate::error::Result;
use crate::estimator::{estimate_sample, h_bruteforce, h_function, naive_estimate_sample, ColumnCensus};
use crate::gates::{discrete_gates, haar_gate, sample_gate, two_site_channel, GateEnsemble, SampledGate, TwoSiteChannel};
use crate::opstrings::{Letter, OperatorString};
use crate::simulator::{FockBasis, FockState, Pairing, ShadowSample};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub error: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub detail: serde_json::Value,
}

impl CheckResult {
    fn new(check: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            passed: error <= tolerance,
            error,
            tolerance,
            detail: serde_json::Value::Null,
        }
    }

    fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = detail;
        self
    }
}

/// Run every suite at the given level.
pub fn run(level: Level) -> Result<Vec<CheckResult>> {
    let max_v = match level {
        Level::Fast => 4,
        Level::Full => 8,
    };
    let max_cols = match level {
        Level::Fast => 4,
        Level::Full => 8,
    };
    let mut out = Vec::new();
    out.extend(two_site_tables());
    out.push(brute_spectrum(max_v)?);
    out.push(sector_independence(max_v));
    out.push(inversion(max_v.min(6))?);
    out.push(h_exhaustive(max_cols, 4));
    out.push(unbiasedness(4, 1)?);
    if level == Level::Full {
        out.push(unbiasedness(6, 2)?);
        out.push(fast_vs_naive(&[8, 10], 1000)?);
    } else {
        out.push(fast_vs_naive(&[6], 100)?);
    }
    Ok(out)
}

/// The single-pair channel of each ensemble against the expected table, entry by entry.
pub fn two_site_tables() -> Vec<CheckResult> {
    let want = TwoSiteChannel::expected();
    let mut out = Vec::new();
    for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
        let got = two_site_channel(ensemble);
        let mut entries = Vec::new();
        for p in Letter::ALL {
            for q in Letter::ALL {
                for r in Letter::ALL {
                    for s in Letter::ALL {
                        let (g, w) = (got.get((p, q), (r, s)), want.get((p, q), (r, s)));
                        if g.norm() > 1e-15 || w.norm() > 1e-15 {
                            entries.push(json!({
                                "in": format!("{p}{q}"),
                                "out": format!("{r}{s}"),
                                "value": [g.re, g.im],
                                "expected": [w.re, w.im],
                            }));
                        }
                    }
                }
            }
        }
        out.push(
            CheckResult::new(format!("two_site_channel/{ensemble}"), got.max_difference(&want), 1e-12)
                .with_detail(json!(entries)),
        );
    }
    out
}

/// Brute-force channel spectrum against the closed form with irrep multiplicities.
pub fn brute_spectrum(max_v: usize) -> Result<CheckResult> {
    let mut err: f64 = 0.0;
    for v in (2..=max_v).step_by(2) {
        let ch = brute_force_channel(v)?;
        for n_z in 0..=v {
            let c = channel::eigenvalues(v, n_z);
            let mut want = Vec::new();
            for l2 in 0..=reduced_sector(v, n_z) {
                want.extend(std::iter::repeat_n(c[l2], irrep_dimension(v, l2)));
            }
            want.sort_by(|a, b| b.total_cmp(a));
            for (g, w) in ch.sector_eigenvalues(n_z).iter().zip(&want) {
                err = err.max((g - w).abs());
            }
        }
    }
    Ok(CheckResult::new(format!("brute_spectrum/V<={max_v}"), err, 1e-10))
}

/// `G·α` in every sector gives the same eigenvalues.
pub fn sector_independence(max_v: usize) -> CheckResult {
    let mut err: f64 = 0.0;
    for v in (2..=max_v).step_by(2) {
        let per_sector: Vec<Vec<f64>> = (0..=v).map(|n_z| channel::eigenvalues_from_alpha(v, n_z)).collect();
        for a in &per_sector {
            for b in &per_sector {
                for (x, y) in a.iter().zip(b) {
                    err = err.max((x - y).abs());
                }
            }
        }
    }
    CheckResult::new(format!("eigenvalue_sector_independence/V<={max_v}"), err, 1e-10)
}

/// β-delocalisation inverts α-delocalisation on every sector.
pub fn inversion(max_v: usize) -> Result<CheckResult> {
    let mut err: f64 = 0.0;
    for v in (2..=max_v).step_by(2) {
        for n_z in 0..=v {
            let a = delocalization_matrix(v, n_z, &alpha_vec(v, n_z));
            let b = delocalization_matrix(v, n_z, &beta_vec(v, n_z)?);
            let id = DMatrix::<f64>::identity(a.nrows(), a.ncols());
            err = err.max((b * a - id).amax());
        }
    }
    Ok(CheckResult::new(format!("inversion/V<={max_v}"), err, 1e-9))
}

/// `h_function` against explicit placement sums for every outcome pattern.
pub fn h_exhaustive(max_cols: usize, max_k: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut err: f64 = 0.0;
    let mut cases = 0usize;
    for cols in 0..=max_cols {
        let gates: Vec<_> = (0..cols).map(|_| haar_gate(&mut rng)).collect();
        for pattern in 0u32..1 << (2 * cols) {
            let columns: Vec<(bool, bool)> = (0..cols)
                .map(|c| ((pattern >> (2 * c)) & 1 == 1, (pattern >> (2 * c + 1)) & 1 == 1))
                .collect();
            let census = ColumnCensus::from_columns(&columns);
            for k in 0..=max_k {
                err = err.max((h_bruteforce(&columns, &gates, k) - h_function(&census, k)).abs());
                cases += 1;
            }
        }
    }
    CheckResult::new(format!("h_function/cols<={max_cols},k_b<={max_k}"), err, 1e-9)
        .with_detail(json!({ "cases": cases }))
}

/// Every number-conserving string on `v` sites with at most `max_weight` non-identity letters.
pub fn conserving_strings(v: usize, max_weight: usize) -> Vec<OperatorString> {
    let mut out = Vec::new();
    let total = 4usize.pow(v as u32);
    for code in 0..total {
        let letters: Vec<Letter> = (0..v).map(|s| Letter::ALL[(code / 4usize.pow(s as u32)) % 4]).collect();
        let s = OperatorString::from_letters(&letters);
        if s.is_conserving() && s.weight() <= max_weight {
            out.push(s);
        }
    }
    out
}

/// Exact protocol average of the fast estimator with the discrete ensemble:
/// every pairing, every gate choice and every outcome, weighted by its probability.
pub fn exact_protocol_average(state: &FockState, s: &OperatorString, cache: &SpectrumCache) -> Result<C64> {
    let v = state.volume();
    let pairings = all_pairings(v)?;
    let choices = 3usize.pow((v / 2) as u32);
    let gates = discrete_gates();
    let mut total = C64::new(0.0, 0.0);
    for pairs in &pairings {
        let pairing = Pairing::new(v, pairs.clone())?;
        for code in 0..choices {
            let picks: Vec<u8> = (0..v / 2).map(|k| ((code / 3usize.pow(k as u32)) % 3) as u8).collect();
            let mut psi = state.clone();
            for (&(i, j), &g) in pairs.iter().zip(&picks) {
                psi.apply_gate(&gates[g as usize], i, j);
            }
            for (k, a) in psi.amplitudes().iter().enumerate() {
                let p = a.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                let config = psi.basis().state(k);
                let row = ShadowSample {
                    pairing: pairing.clone(),
                    gates: picks.iter().map(|g| SampledGate::Discrete(*g)).collect(),
                    bits: (0..v).map(|b| (config >> b) & 1 == 1).collect(),
                };
                total += estimate_sample(&row, s, cache)? * p;
            }
        }
    }
    Ok(total / (pairings.len() * choices) as f64)
}

/// Random normalised state with `n` particles on `v` sites.
pub fn random_state(v: usize, n: usize, seed: u64) -> Result<FockState> {
    let basis = Arc::new(FockBasis::new(v, n)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..basis.dim())
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    FockState::new(basis, amps)
}

/// Exact protocol average against the true expectation, for all strings of
/// weight `<= 4` and one random state per particle number.
pub fn unbiasedness(v: usize, seed: u64) -> Result<CheckResult> {
    let cache = SpectrumCache::new();
    let strings = conserving_strings(v, 4);
    let mut err: f64 = 0.0;
    for n in 0..=v {
        let psi = random_state(v, n, seed + n as u64)?;
        for s in &strings {
            let got = exact_protocol_average(&psi, s, &cache)?;
            let want = psi.expectation(s)?;
            err = err.max((got - want).norm());
        }
    }
    Ok(CheckResult::new(format!("unbiasedness/V={v}"), err, 1e-10)
        .with_detail(json!({ "strings": strings.len(), "particle_numbers": v + 1 })))
}

/// Random row with a uniformly placed outcome of random particle number.
pub fn random_row<R: Rng + ?Sized>(v: usize, ensemble: GateEnsemble, rng: &mut R) -> ShadowSample {
    let pairing = crate::simulator::sample_pairing(v, rng).expect("even volume");
    let gates = pairing.pairs.iter().map(|_| sample_gate(ensemble, rng)).collect();
    let n = rng.random_range(0..=v);
    let mut sites: Vec<usize> = (0..v).collect();
    for k in 0..n {
        let j = rng.random_range(k..v);
        sites.swap(k, j);
    }
    let mut bits = vec![false; v];
    for &s in &sites[..n] {
        bits[s] = true;
    }
    ShadowSample { pairing, gates, bits }
}

/// Random conserving string with `n_plus` ladder pairs and `n_z` Zs.
pub fn random_string<R: Rng + ?Sized>(v: usize, n_plus: usize, n_z: usize, rng: &mut R) -> OperatorString {
    let mut sites: Vec<usize> = (0..v).collect();
    for k in 0..v {
        let j = rng.random_range(k..v);
        sites.swap(k, j);
    }
    let mut letters = vec![Letter::Identity; v];
    for k in 0..n_plus {
        letters[sites[2 * k]] = Letter::Raise;
        letters[sites[2 * k + 1]] = Letter::Lower;
    }
    for k in 0..n_z {
        letters[sites[2 * n_plus + k]] = Letter::Z;
    }
    OperatorString::from_letters(&letters)
}

/// Fast estimator against the naive expansion on random rows and strings.
pub fn fast_vs_naive(volumes: &[usize], rows: usize) -> Result<CheckResult> {
    let cache = SpectrumCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xfa57);
    let mut err: f64 = 0.0;
    let mut compared = 0;
    for &v in volumes {
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            for _ in 0..rows {
                let row = random_row(v, ensemble, &mut rng);
                let n_plus = rng.random_range(0..=2);
                let n_z = rng.random_range(0..=3.min(v - 2 * n_plus));
                let s = random_string(v, n_plus, n_z, &mut rng);
                let fast = estimate_sample(&row, &s, &cache)?;
                let naive = naive_estimate_sample(&row, &s, &cache)?;
                err = err.max((fast - naive).norm() / naive.norm().max(1.0));
                compared += 1;
            }
        }
    }
    Ok(CheckResult::new(format!("fast_vs_naive/V={volumes:?}"), err, 1e-10)
        .with_detail(json!({ "rows": compared })))
}
