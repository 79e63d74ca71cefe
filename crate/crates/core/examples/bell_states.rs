// Tell `(|01⟩ + |10⟩)/√2` from `(|01⟩ - |10⟩)/√2` with the hopping observable.
//
// Both states have identical occupation statistics, so no measurement of
// single-site occupations alone can separate them.

use std::sync::Arc;

use allpairs::channel::SpectrumCache;
use allpairs::estimator::{estimate, Estimate, Method, Observable};
use allpairs::gates::GateEnsemble;
use allpairs::opstrings::{Letter, OperatorString};
use allpairs::simulator::{collect_shadow, FockBasis, FockState};
use allpairs::C64;

pub fn run(samples: usize) -> allpairs::Result<Vec<(f64, Estimate)>> {
    let basis = Arc::new(FockBasis::new(2, 1)?);
    let hop = OperatorString::new(2, [(0, Letter::Raise), (1, Letter::Lower)])?;
    let obs = Observable::hermitian(hop);
    let cache = SpectrumCache::new();
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let psi = FockState::new(Arc::clone(&basis), vec![C64::new(1.0, 0.0), C64::new(sign, 0.0)])?;
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            let table = collect_shadow(&psi, ensemble, samples, 7)?;
            let est = estimate(&table, &obs, Method::Mean, &cache)?;
            println!(
                "sign {sign:+}  {ensemble:<9}  <a+a + h.c.> = {:+.4} ± {:.4}   (exact {sign:+})",
                est.value.re, est.std_error[0]
            );
            out.push((sign, est));
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    run(10_000).map(|_| ())
}
