// Build the measurement channel by brute force and compare with the closed form.

use allpairs::channel::{self, brute_force_channel, irrep_dimension, reduced_sector};
use allpairs::gates::{two_site_channel, GateEnsemble, TwoSiteChannel};

/// Largest deviation found over all sectors of `V <= max_v`.
pub fn run(max_v: usize) -> allpairs::Result<f64> {
    let want = TwoSiteChannel::expected();
    for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
        let got = two_site_channel(ensemble);
        println!("two-site channel, {ensemble}: max deviation {:.1e}", got.max_difference(&want));
    }
    println!("nonzero entries (input -> output: value):");
    for (input, output, value) in want.entries() {
        println!("  {}{} -> {}{}: {:.4}", input.0, input.1, output.0, output.1, value.re);
    }

    let mut worst: f64 = 0.0;
    for v in (2..=max_v).step_by(2) {
        let brute = brute_force_channel(v)?;
        for n_z in 0..=v {
            let mut got = brute.sector_eigenvalues(n_z);
            got.sort_by(|a, b| b.total_cmp(a));
            let c = channel::eigenvalues(v, n_z);
            let mut want = Vec::new();
            for l2 in 0..=reduced_sector(v, n_z) {
                want.extend(std::iter::repeat_n(c[l2], irrep_dimension(v, l2)));
            }
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
        }
        println!("V = {v}: brute-force spectrum agrees to {worst:.1e}");
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    run(8).map(|_| ())
}
