// Channel spectrum of a few sectors and its large-volume limit.
//
// ```text
// cargo run --release --example spectrum
// ```

use allpairs::channel::{self, ChannelSpectrum};

pub fn run() -> allpairs::Result<Vec<ChannelSpectrum>> {
    let mut out = Vec::new();
    for (v, n_z) in [(2, 1), (4, 1), (8, 3), (24, 6)] {
        let s = ChannelSpectrum::new(v, n_z)?;
        println!("V = {v}, n_z = {n_z}");
        println!("  alpha = {:.6?}", s.alpha);
        println!("  c     = {:.6?}", s.c);
        println!("  beta  = {:.6?}", s.beta);
        out.push(s);
    }

    println!("\nc_lambda2(V) against (2/3)^lambda2");
    println!("{:>6} {:>12} {:>12} {:>12}", "V", "lambda2=1", "lambda2=2", "lambda2=4");
    let mut v = 16;
    while v <= 512 {
        let c: Vec<f64> = [1, 2, 4].iter().map(|&l| channel::eigenvalue_closed_form(v, l)).collect();
        println!("{v:>6} {:>12.8} {:>12.8} {:>12.8}", c[0], c[1], c[2]);
        v *= 2;
    }
    println!("{:>6} {:>12.8} {:>12.8} {:>12.8}", "limit", 2.0 / 3.0, 4.0 / 9.0, 16.0 / 81.0);
    Ok(out)
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    run().map(|_| ())
}
