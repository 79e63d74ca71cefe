// The exact protocol average equals the true expectation value.
//
// At four sites every pairing, gate choice and outcome can be enumerated, so
// the estimator's mean is computed without sampling noise.

use allpairs::channel::SpectrumCache;
use allpairs::verify::{conserving_strings, exact_protocol_average, random_state};

pub fn run() -> allpairs::Result<f64> {
    let cache = SpectrumCache::new();
    let psi = random_state(4, 2, 42)?;
    let mut worst: f64 = 0.0;
    for s in conserving_strings(4, 4) {
        let avg = exact_protocol_average(&psi, &s, &cache)?;
        let exact = psi.expectation(&s)?;
        worst = worst.max((avg - exact).norm());
        if s.weight() == 2 && s.n_plus() == 1 {
            println!("{s}: protocol {:+.6}{:+.6}i, exact {:+.6}{:+.6}i", avg.re, avg.im, exact.re, exact.im);
        }
    }
    println!("largest deviation over all strings: {worst:.1e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    run().map(|_| ())
}
