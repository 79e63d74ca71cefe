// Write a table to disk, describe an observable in JSON and estimate it.

use allpairs::channel::SpectrumCache;
use allpairs::estimator::{estimate, EstimateReport, Method, Observable, ShadowTable};
use allpairs::gates::GateEnsemble;
use allpairs::simulator::{collect_shadow, exact_expectation, ground_state, LadderModel, LanczosOptions};
use allpairs::C64;

const OBSERVABLE: &str = r#"{"terms":[
  {"coeff":[0.5,0],"ops":{"0":"a+","2":"a-"}},
  {"coeff":[0.5,0],"ops":{"0":"a-","2":"a+"}},
  {"coeff":[0.25,0],"ops":{"1":"Z","3":"Z"}}
]}"#;

pub fn run(dir: &std::path::Path) -> allpairs::Result<(C64, Vec<EstimateReport>)> {
    let model = LadderModel::new(4, 1.0, 2.0);
    let (_, psi) = ground_state(&model, &LanczosOptions::default())?;
    let path = dir.join("ladder4.ndjson.gz");
    collect_shadow(&psi, GateEnsemble::HaarBlock, 20_000, 3)?.save(&path)?;

    let table = ShadowTable::load(&path)?;
    let obs = Observable::from_json(OBSERVABLE, table.volume())?;
    let exact: C64 = obs
        .terms
        .iter()
        .map(|(c, s)| exact_expectation(&psi, s).map(|e| c * e))
        .sum::<allpairs::Result<C64>>()?;
    println!("exact value {:.5}", exact.re);

    let cache = SpectrumCache::new();
    let mut reports = Vec::new();
    for method in [Method::Mean, Method::MedianOfMeans { groups: 20 }] {
        let report = estimate(&table, &obs, method, &cache)?.report(&obs);
        println!("{}", serde_json::to_string(&report).expect("report serialises"));
        reports.push(report);
    }
    Ok((exact, reports))
}

#[allow(dead_code)]
fn main() -> allpairs::Result<()> {
    let dir = std::env::temp_dir().join("allpairs-custom-observable");
    std::fs::create_dir_all(&dir)?;
    run(&dir).map(|_| ())
}
