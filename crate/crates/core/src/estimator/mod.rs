//! Expectation values from shadow tables.

pub mod hfunc;
mod sample;
pub mod table;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::SpectrumCache;
use crate::error::{Error, Result};
use crate::opstrings::OperatorString;
use crate::C64;

pub use hfunc::{h_bruteforce, h_function, ColumnCensus};
pub use sample::{estimate_sample, naive_estimate_sample, SampleView, StringEstimator, NAIVE_MAX_VOLUME};
pub use table::{ShadowTable, TableHeader};

/// Linear combination of operator strings on a common volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub volume: usize,
    pub terms: Vec<(C64, OperatorString)>,
}

#[derive(Serialize, Deserialize)]
struct ObservableRepr {
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: [f64; 2],
    ops: BTreeMap<String, String>,
}

impl Observable {
    pub fn new(volume: usize) -> Self {
        Self {
            volume,
            terms: Vec::new(),
        }
    }

    pub fn single(s: OperatorString) -> Self {
        Self {
            volume: s.volume(),
            terms: vec![(C64::new(1.0, 0.0), s)],
        }
    }

    /// `S + S†`, or just `S` when the string is its own adjoint.
    pub fn hermitian(s: OperatorString) -> Self {
        let adj = s.adjoint();
        let mut o = Self::single(s.clone());
        if adj != s {
            o.terms.push((C64::new(1.0, 0.0), adj));
        }
        o
    }

    pub fn push(&mut self, coeff: C64, s: OperatorString) -> Result<&mut Self> {
        if s.volume() != self.volume {
            return Err(Error::TermVolumeMismatch {
                term: self.terms.len(),
                term_volume: s.volume(),
                table_volume: self.volume,
            });
        }
        if !s.is_conserving() {
            return Err(Error::NonConserving {
                raise: s.n_plus(),
                lower: s.n_minus(),
            });
        }
        self.terms.push((coeff, s));
        Ok(self)
    }

    /// Parse `{"terms":[{"coeff":[re,im],"ops":{"<site>":"I|Z|a+|a-"}}]}`.
    pub fn from_json(text: &str, volume: usize) -> Result<Self> {
        let repr: ObservableRepr =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("observable: {e}")))?;
        let mut o = Self::new(volume);
        for (k, t) in repr.terms.into_iter().enumerate() {
            let s = OperatorString::from_ops_map(volume, &t.ops)
                .map_err(|e| Error::Parse(format!("term {k}: {e}")))?;
            o.push(C64::new(t.coeff[0], t.coeff[1]), s)
                .map_err(|e| Error::Parse(format!("term {k}: {e}")))?;
        }
        Ok(o)
    }

    pub fn to_json(&self) -> String {
        let repr = ObservableRepr {
            terms: self
                .terms
                .iter()
                .map(|(c, s)| TermRepr {
                    coeff: [c.re, c.im],
                    ops: s.to_ops_map(),
                })
                .collect(),
        };
        serde_json::to_string(&repr).expect("observable serialises")
    }

    /// Variance proxy for each term, and for the sum by the triangle inequality.
    pub fn shadow_norm_bounds(&self) -> (Vec<f64>, f64) {
        let per_term: Vec<f64> = self
            .terms
            .iter()
            .map(|(c, s)| shadow_norm_bound(self.volume, s.n_plus(), s.n_z(), c.norm()))
            .collect();
        let root: f64 = per_term.iter().map(|b| b.sqrt()).sum();
        (per_term, root * root)
    }
}

/// `(3/2)^{n+ + 2 n_z} · V^{n+} / n+! · ‖O‖²`.
pub fn shadow_norm_bound(volume: usize, n_plus: usize, n_z: usize, op_norm: f64) -> f64 {
    let mut b = 1.5f64.powi((n_plus + 2 * n_z) as i32) * op_norm * op_norm;
    for k in 1..=n_plus {
        b *= volume as f64 / k as f64;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Mean,
    MedianOfMeans {
        groups: usize,
    },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Mean => f.write_str("mean"),
            Method::MedianOfMeans { groups } => write!(f, "median_of_means({groups})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: C64,
    /// Standard errors of the real and imaginary parts.
    pub std_error: [f64; 2],
    pub n_samples: usize,
    pub method: Method,
    /// Set when the error is a normal approximation rather than a sample statistic.
    pub approximate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimateReport {
    pub value: [f64; 2],
    pub std_error: [f64; 2],
    pub n: usize,
    pub method: String,
    pub bound: f64,
    pub term_bounds: Vec<f64>,
    pub approximate: bool,
}

impl Estimate {
    pub fn report(&self, observable: &Observable) -> EstimateReport {
        let (term_bounds, bound) = observable.shadow_norm_bounds();
        EstimateReport {
            value: [self.value.re, self.value.im],
            std_error: self.std_error,
            n: self.n_samples,
            method: self.method.to_string(),
            bound,
            term_bounds,
            approximate: self.approximate,
        }
    }
}

/// Per-row values of an observable, in row order.
pub fn row_values(table: &ShadowTable, obs: &Observable, cache: &SpectrumCache) -> Result<Vec<C64>> {
    for (k, (_, s)) in obs.terms.iter().enumerate() {
        if s.volume() != table.volume() {
            return Err(Error::TermVolumeMismatch {
                term: k,
                term_volume: s.volume(),
                table_volume: table.volume(),
            });
        }
    }
    let plans: Vec<(C64, StringEstimator)> = obs
        .terms
        .iter()
        .map(|(c, s)| Ok((*c, StringEstimator::new(s, cache)?)))
        .collect::<Result<_>>()?;
    Ok(table
        .rows
        .par_iter()
        .map(|row| {
            let view = SampleView::new(row);
            plans.iter().map(|(c, p)| c * p.evaluate(&view)).sum()
        })
        .collect())
}

/// Per-row values of several observables, sharing one view per row.
///
/// `out[k][r]` is observable `k` on row `r`.
pub fn row_values_many(
    table: &ShadowTable,
    observables: &[Observable],
    cache: &SpectrumCache,
) -> Result<Vec<Vec<C64>>> {
    let mut plans = Vec::with_capacity(observables.len());
    for obs in observables {
        let mut terms = Vec::with_capacity(obs.terms.len());
        for (k, (c, s)) in obs.terms.iter().enumerate() {
            if s.volume() != table.volume() {
                return Err(Error::TermVolumeMismatch {
                    term: k,
                    term_volume: s.volume(),
                    table_volume: table.volume(),
                });
            }
            terms.push((*c, StringEstimator::new(s, cache)?));
        }
        plans.push(terms);
    }
    let per_row: Vec<Vec<C64>> = table
        .rows
        .par_iter()
        .map(|row| {
            let view = SampleView::new(row);
            plans
                .iter()
                .map(|terms| terms.iter().map(|(c, p)| c * p.evaluate(&view)).sum())
                .collect()
        })
        .collect();
    Ok((0..observables.len())
        .map(|k| per_row.iter().map(|r| r[k]).collect())
        .collect())
}

/// Aggregate per-row values.
pub fn aggregate(values: &[C64], method: Method) -> Result<Estimate> {
    if values.is_empty() {
        return Err(Error::EmptyTable);
    }
    let n = values.len();
    match method {
        Method::Mean => {
            let (mean, sd) = mean_and_std(values);
            let se = |s: f64| if n > 1 { s / (n as f64).sqrt() } else { 0.0 };
            Ok(Estimate {
                value: mean,
                std_error: [se(sd[0]), se(sd[1])],
                n_samples: n,
                method,
                approximate: false,
            })
        }
        Method::MedianOfMeans { groups } => {
            if groups == 0 || groups > n {
                return Err(Error::InvalidArgument(format!(
                    "median of means needs 1..={n} groups, got {groups}"
                )));
            }
            let means: Vec<C64> = (0..groups)
                .map(|g| {
                    let (lo, hi) = (g * n / groups, (g + 1) * n / groups);
                    values[lo..hi].iter().sum::<C64>() / (hi - lo) as f64
                })
                .collect();
            let re = median(means.iter().map(|z| z.re).collect());
            let im = median(means.iter().map(|z| z.im).collect());
            let (_, sd) = mean_and_std(&means);
            // asymptotic efficiency of the median for normal data
            let k = groups as f64;
            let se = |s: f64| if groups > 1 { 1.2533 * s / k.sqrt() } else { 0.0 };
            Ok(Estimate {
                value: C64::new(re, im),
                std_error: [se(sd[0]), se(sd[1])],
                n_samples: n,
                method,
                approximate: true,
            })
        }
    }
}

/// Estimate an observable from a table.
pub fn estimate(table: &ShadowTable, obs: &Observable, method: Method, cache: &SpectrumCache) -> Result<Estimate> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    aggregate(&row_values(table, obs, cache)?, method)
}

/// Sample mean and sample standard deviations of the real and imaginary parts.
pub fn mean_and_std(values: &[C64]) -> (C64, [f64; 2]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<C64>() / n;
    if values.len() < 2 {
        return (mean, [0.0, 0.0]);
    }
    let (mut vr, mut vi) = (0.0, 0.0);
    for z in values {
        vr += (z.re - mean.re).powi(2);
        vi += (z.im - mean.im).powi(2);
    }
    (mean, [(vr / (n - 1.0)).sqrt(), (vi / (n - 1.0)).sqrt()])
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateEnsemble;
    use crate::opstrings::Letter;
    use crate::simulator::{collect_shadow, FockBasis, FockState};
    use std::sync::Arc;

    fn bell(sign: f64) -> FockState {
        let basis = Arc::new(FockBasis::new(2, 1).unwrap());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        FockState::from_configurations(basis, [(0b01, C64::new(s, 0.0)), (0b10, C64::new(sign * s, 0.0))])
            .unwrap()
    }

    #[test]
    fn norm_bound_values() {
        assert_eq!(shadow_norm_bound(24, 0, 0, 1.0), 1.0);
        assert!((shadow_norm_bound(24, 1, 0, 1.0) - 36.0).abs() < 1e-12);
        assert!((shadow_norm_bound(10, 2, 0, 1.0) - 2.25 * 100.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_observable_is_exact() {
        let table = collect_shadow(&bell(1.0), GateEnsemble::Discrete3, 50, 1).unwrap();
        let obs = Observable::single(OperatorString::identity(2));
        let cache = SpectrumCache::new();
        let e = estimate(&table, &obs, Method::Mean, &cache).unwrap();
        assert_eq!(e.value, C64::new(1.0, 0.0));
        assert_eq!(e.std_error, [0.0, 0.0]);
    }

    #[test]
    fn bell_states_are_distinguished() {
        let cache = SpectrumCache::new();
        let hop = OperatorString::new(2, [(0, Letter::Raise), (1, Letter::Lower)]).unwrap();
        let obs = Observable::hermitian(hop);
        for sign in [1.0, -1.0] {
            let table = collect_shadow(&bell(sign), GateEnsemble::Discrete3, 10_000, 4).unwrap();
            let e = estimate(&table, &obs, Method::Mean, &cache).unwrap();
            assert!((e.value.re - sign).abs() < 3.0 * e.std_error[0], "{e:?}");
            assert!(e.value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn median_of_means() {
        let values: Vec<C64> = (0..10).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let e = aggregate(&values, Method::MedianOfMeans { groups: 5 }).unwrap();
        // group means 0.5, 2.5, 4.5, 6.5, 8.5
        assert_eq!(e.value, C64::new(4.5, -4.5));
        assert!(e.approximate);
        assert!(aggregate(&values, Method::MedianOfMeans { groups: 11 }).is_err());
        assert!(matches!(aggregate(&[], Method::Mean), Err(Error::EmptyTable)));
        let one = aggregate(&values[..1], Method::Mean).unwrap();
        assert_eq!(one.std_error, [0.0, 0.0]);
    }

    #[test]
    fn observable_json() {
        let text = r#"{"terms":[{"coeff":[0.5,0],"ops":{"0":"a+","3":"a-"}},{"coeff":[1,0],"ops":{"2":"Z"}}]}"#;
        let o = Observable::from_json(text, 4).unwrap();
        assert_eq!(o.terms.len(), 2);
        assert_eq!(Observable::from_json(&o.to_json(), 4).unwrap(), o);
        let bad = r#"{"terms":[{"coeff":[1,0],"ops":{}},{"coeff":[1,0],"ops":{"x":"Z"}}]}"#;
        let err = Observable::from_json(bad, 4).unwrap_err().to_string();
        assert!(err.contains("term 1"), "{err}");
        let nc = r#"{"terms":[{"coeff":[1,0],"ops":{"0":"a+"}}]}"#;
        assert!(Observable::from_json(nc, 4).unwrap_err().to_string().contains("term 0"));
    }

    #[test]
    fn term_volume_is_checked() {
        let table = collect_shadow(&bell(1.0), GateEnsemble::Discrete3, 5, 1).unwrap();
        let obs = Observable::single(OperatorString::identity(4));
        let cache = SpectrumCache::new();
        assert!(matches!(
            estimate(&table, &obs, Method::Mean, &cache),
            Err(Error::TermVolumeMismatch { .. })
        ));
    }
}
