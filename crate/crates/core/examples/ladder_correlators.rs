// Exact and shadow correlators on a small ladder, in both regimes.
//
// ```text
// cargo run --release --example ladder_correlators -- 8 20000 10
// ```
// Arguments are rungs, samples per table and number of tables.

use allpairs::cli::{correlators, Demo};
use allpairs::gates::GateEnsemble;
use allpairs::simulator::LadderModel;

pub fn run(rungs: usize, samples: usize, tables: usize) -> allpairs::Result<Vec<Demo>> {
    let mut out = Vec::new();
    for u in [0.5, 8.0] {
        let model = LadderModel::new(rungs, 1.0, u);
        let demo = correlators(&model, GateEnsemble::Discrete3, samples, tables, 11)?;
        println!("rungs = {rungs}, t = 1, U = {u}, E0 = {:.6}", demo.energy);
        println!("{:>3} {:>22} {:>22}", "r", "single (exact/shadow)", "pair (exact/shadow)");
        let se = |sd: f64| sd / (tables as f64).sqrt();
        for row in &demo.rows {
            println!(
                "{:>3} {:>8.4} {:>7.4}±{:.4} {:>8.4} {:>7.4}±{:.4}",
                row.r,
                row.exact_single,
                row.shadow_single,
                se(row.shadow_single_std),
                row.exact_pair,
                row.shadow_pair,
                se(row.shadow_pair_std)
            );
        }
        out.push(demo);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let get = |k: usize, d: usize| args.get(k).copied().unwrap_or(d);
    run(get(0, 6), get(1, 5000), get(2, 10)).map(|_| ())
}
