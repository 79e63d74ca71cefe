// Acceptance suite: one PASS/FAIL line per criterion.
//
//   cargo test --release --test acceptance
//   cargo test --release --test acceptance -- --include-ignored   # adds the 12-rung run

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use allpairs::channel::{self, exact, ChannelSpectrum, SpectrumCache};
use allpairs::cli::{correlators, Demo};
use allpairs::combinatorics::{binomial, operator_basis_count};
use allpairs::estimator::{estimate, row_values, Method, Observable, SampleView, StringEstimator};
use allpairs::gates::GateEnsemble;
use allpairs::opstrings::{Letter, OperatorString};
use allpairs::simulator::{
    collect_shadow, ground_state, FockBasis, FockState, LadderModel, LanczosOptions, ShadowSample,
};
use allpairs::verify;
use allpairs::C64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let extended = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let only_extended = args.iter().any(|a| a == "--ignored");

    let criteria: [Criterion; 12] = [
        (1, "two-site channel equality", ac01_two_site_channel),
        (2, "spectral certification", ac02_spectrum),
        (3, "channel inversion", ac03_inversion),
        (4, "h-function oracle", ac04_h_function),
        (5, "exact unbiasedness at V=4", ac05_unbiasedness),
        (6, "fast/naive estimator equivalence", ac06_fast_vs_naive),
        (7, "Bell state discrimination", ac07_bell),
        (8, "large-V eigenvalue limit", ac08_large_v),
        (9, "variance bound", ac09_variance_bound),
        (10, "8-rung ladder correlators", ac10_ladder),
        (11, "linear estimation cost", ac11_scaling),
        (12, "operator basis count", ac12_basis_count),
    ];

    let mut failed = 0;
    if !only_extended {
        for (n, name, f) in criteria {
            let start = Instant::now();
            let o = f();
            println!(
                "{} AC{n:02} {name}: {} [{:.1}s]",
                if o.passed { "PASS" } else { "FAIL" },
                o.detail,
                start.elapsed().as_secs_f64()
            );
            failed += usize::from(!o.passed);
        }
    }
    if extended {
        let start = Instant::now();
        let o = ext_twelve_rungs();
        println!(
            "{} EXT 12-rung ladder correlators: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ac01_two_site_channel() -> Outcome {
    let start = Instant::now();
    let checks = verify::two_site_tables();
    let elapsed = start.elapsed();
    let err = checks.iter().map(|c| c.error).fold(0.0, f64::max);
    let entries: usize = checks.iter().map(|c| c.detail.as_array().map_or(0, |a| a.len())).sum();
    outcome(
        err <= 1e-12 && elapsed < Duration::from_secs(1),
        format!(
            "max entry error {err:.1e} (tol 1e-12) over {entries} nonzero entries, both ensembles, {:.3}s (limit 1s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn ac02_spectrum() -> Outcome {
    let start = Instant::now();
    let brute = verify::brute_spectrum(8).expect("brute channel");
    let sectors = verify::sector_independence(8);
    let elapsed = start.elapsed();
    outcome(
        brute.passed && sectors.passed && elapsed < Duration::from_secs(60),
        format!(
            "brute vs closed form {:.1e}, n_z dependence of c {:.1e} (tol 1e-10), V in 2..=8, {:.1}s (limit 60s)",
            brute.error,
            sectors.error,
            elapsed.as_secs_f64()
        ),
    )
}

fn ac03_inversion() -> Outcome {
    let inv = verify::inversion(6).expect("inversion");
    let spot = |v: usize, n_z: usize, want: &[f64]| {
        let got = channel::beta_vec(v, n_z).expect("beta");
        got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let e21 = spot(2, 1, &[2.0, -1.0]);
    let e41 = spot(4, 1, &[8.0 / 5.0, -1.0 / 5.0]);
    outcome(
        inv.error < 1e-9 && e21 < 1e-12 && e41 < 1e-12,
        format!(
            "|M^-1 M - 1| = {:.1e} (tol 1e-9) for V <= 6; beta(2,1) err {e21:.1e}, beta(4,1) err {e41:.1e}",
            inv.error
        ),
    )
}

fn ac04_h_function() -> Outcome {
    let start = Instant::now();
    let r = verify::h_exhaustive(8, 4);
    let elapsed = start.elapsed();
    outcome(
        r.passed && elapsed < Duration::from_secs(60),
        format!(
            "{} cases, max |h - brute| {:.1e} (tol {:.0e}, float rounding of the brute sum only), {:.1}s (limit 60s)",
            r.detail["cases"],
            r.error,
            r.tolerance,
            elapsed.as_secs_f64()
        ),
    )
}

fn ac05_unbiasedness() -> Outcome {
    let r = verify::unbiasedness(4, 2024).expect("enumeration");
    outcome(
        r.error <= 1e-10,
        format!(
            "{} strings x {} particle sectors, max |E[est] - <S>| = {:.1e} (tol 1e-10)",
            r.detail["strings"], r.detail["particle_numbers"], r.error
        ),
    )
}

fn ac06_fast_vs_naive() -> Outcome {
    let r = verify::fast_vs_naive(&[8, 10], 300).expect("estimators");
    let rows = r.detail["rows"].as_u64().unwrap_or(0);
    outcome(
        r.error <= 1e-10 && rows >= 1000,
        format!(
            "{rows} random (row, string) pairs, max relative difference {:.1e} (tol 1e-10)",
            r.error
        ),
    )
}

fn ac07_bell() -> Outcome {
    let basis = Arc::new(FockBasis::new(2, 1).unwrap());
    let hop = OperatorString::new(2, [(0, Letter::Raise), (1, Letter::Lower)]).unwrap();
    let obs = Observable::hermitian(hop);
    let cache = SpectrumCache::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for sign in [1.0, -1.0] {
        let psi = FockState::new(Arc::clone(&basis), vec![C64::new(1.0, 0.0), C64::new(sign, 0.0)]).unwrap();
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            let table = collect_shadow(&psi, ensemble, 10_000, 100).unwrap();
            let e = estimate(&table, &obs, Method::Mean, &cache).unwrap();
            let z = (e.value.re - sign).abs() / e.std_error[0];
            ok &= z <= 3.0;
            parts.push(format!("{sign:+}/{ensemble}: {:+.3}±{:.3}", e.value.re, e.std_error[0]));
        }
    }
    outcome(ok, format!("{} (3 SE, 10^4 samples)", parts.join(", ")))
}

fn ac08_large_v() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for l2 in 1..=4usize {
        let limit = num_rational::BigRational::new(2.into(), 3.into()).pow(l2 as i32);
        let gap = |v: usize| {
            let d = exact::eigenvalue_closed_form(v, l2) - &limit;
            exact::ratio_to_f64(&d).abs()
        };
        let mut v = 16;
        while v < 512 {
            let ratio = gap(2 * v) / gap(v);
            worst = worst.max(ratio);
            ok &= ratio <= 0.6;
            v *= 2;
        }
    }
    outcome(
        ok,
        format!("largest gap(2V)/gap(V) = {worst:.4} (limit 0.6) for lambda2 <= 4, V = 16..512, exact arithmetic"),
    )
}

fn sample_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (m2 * n / (n - 1.0), ((m4 - m2 * m2) / n).sqrt())
}

fn ac09_variance_bound() -> Outcome {
    let cache = SpectrumCache::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for u in [0.5, 8.0] {
        let model = LadderModel::new(6, 1.0, u);
        let (_, psi) = ground_state(&model, &LanczosOptions::default()).unwrap();
        let v = model.volume();
        let (a0, b0, a1, b1) = (model.site_a(0), model.site_b(0), model.site_a(1), model.site_b(1));
        let s = |l: &[(usize, Letter)]| OperatorString::new(v, l.iter().copied()).unwrap();
        let observables = [
            ("hop", Observable::hermitian(s(&[(a0, Letter::Raise), (a1, Letter::Lower)]))),
            (
                "pair-hop",
                Observable::hermitian(s(&[
                    (a0, Letter::Raise),
                    (b0, Letter::Raise),
                    (a1, Letter::Lower),
                    (b1, Letter::Lower),
                ])),
            ),
            ("density", Observable::single(s(&[(a0, Letter::Z)]))),
            ("density-density", Observable::single(s(&[(a0, Letter::Z), (b1, Letter::Z)]))),
        ];
        for ensemble in [GateEnsemble::Discrete3, GateEnsemble::HaarBlock] {
            let table = collect_shadow(&psi, ensemble, 20_000, 9).unwrap();
            for (name, obs) in &observables {
                let values: Vec<f64> = row_values(&table, obs, &cache).unwrap().iter().map(|z| z.re).collect();
                let (var, se) = sample_variance(&values);
                let bound = obs.shadow_norm_bounds().1;
                ok &= var <= bound + 3.0 * se;
                parts.push(format!("U={u}/{ensemble}/{name} {:.2}", var / bound));
            }
        }
    }
    outcome(ok, format!("variance/bound: {}", parts.join(", ")))
}

fn check_demo(demo: &Demo, paired: bool) -> (bool, f64, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let se = |sd: f64| sd / (demo.tables as f64).sqrt();
    for row in &demo.rows {
        for (shadow, exact, sd) in [
            (row.shadow_single, row.exact_single, row.shadow_single_std),
            (row.shadow_pair, row.exact_pair, row.shadow_pair_std),
        ] {
            let dev = (shadow - exact).abs();
            // some correlators are fixed by the particle number and have no spread
            let z = if dev < 1e-12 { 0.0 } else { dev / se(sd) };
            worst = worst.max(z);
            ok &= z <= 3.0;
        }
    }
    let mut order = String::new();
    if paired {
        for row in demo.rows.iter().filter(|r| r.r >= 3) {
            let holds = row.shadow_pair > row.shadow_single && row.exact_pair > row.exact_single;
            ok &= holds;
            order += &format!(" r={}: pair {:.4} > single {:.4}", row.r, row.shadow_pair, row.shadow_single);
        }
    }
    (ok, worst, order)
}

fn ac10_ladder() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for u in [0.5, 8.0] {
        let model = LadderModel::new(8, 1.0, u);
        let demo = correlators(&model, GateEnsemble::Discrete3, 20_000, 50, 1).unwrap();
        let (good, worst, order) = check_demo(&demo, u > 1.0);
        ok &= good;
        parts.push(format!("U={u}: worst deviation {worst:.2} SE{order}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1800);
    outcome(
        ok,
        format!("{} (limit 3 SE, 50 x 2x10^4 samples, {:.0}s of 1800s)", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn ext_twelve_rungs() -> Outcome {
    let tables: usize = std::env::var("ALLPAIRS_EXT_TABLES").ok().and_then(|s| s.parse().ok()).unwrap_or(50);
    let model = LadderModel::new(12, 1.0, 8.0);
    let demo = correlators(&model, GateEnsemble::Discrete3, 20_000, tables, 1).unwrap();
    let (ok, worst, order) = check_demo(&demo, true);
    outcome(ok, format!("{tables} tables, worst deviation {worst:.2} SE (limit 3);{order}"))
}

fn time_per_row(est: &StringEstimator, rows: &[ShadowSample]) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..7 {
        let start = Instant::now();
        let mut acc = C64::new(0.0, 0.0);
        for row in rows {
            acc += est.evaluate(&SampleView::new(row));
        }
        std::hint::black_box(acc);
        best = best.min(start.elapsed().as_secs_f64() / rows.len() as f64);
    }
    best
}

fn ac11_scaling() -> Outcome {
    let cache = SpectrumCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let volumes = [32usize, 64, 128, 256, 512];
    let mut times = Vec::new();
    for &v in &volumes {
        let rows: Vec<ShadowSample> = (0..4000)
            .map(|_| verify::random_row(v, GateEnsemble::HaarBlock, &mut rng))
            .collect();
        let s = OperatorString::new(v, [(1, Letter::Z), (v / 2 + 3, Letter::Z)]).unwrap();
        times.push(time_per_row(&StringEstimator::new(&s, &cache).unwrap(), &rows));
    }
    // least-squares line t = a + b V
    let n = volumes.len() as f64;
    let xs: Vec<f64> = volumes.iter().map(|&v| v as f64).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, times.iter().sum::<f64>() / n);
    let b = xs.iter().zip(&times).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let a = my - b * mx;
    let ratios: Vec<f64> = xs.iter().zip(&times).map(|(x, t)| t / (a + b * x)).collect();
    let linear_ok = ratios.iter().all(|r| (1.0 / 1.2..=1.2).contains(r));

    // spectrum precompute against n_z, fresh sectors each time
    let sizes = [4usize, 6, 8, 10, 12, 14];
    let mut pre = Vec::new();
    for &n_z in &sizes {
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let start = Instant::now();
            std::hint::black_box(ChannelSpectrum::new(256, n_z).unwrap());
            best = best.min(start.elapsed().as_secs_f64());
        }
        pre.push(best);
    }
    let lx: Vec<f64> = sizes.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = pre.iter().map(|t| t.ln()).collect();
    let (mlx, mly) = (lx.iter().sum::<f64>() / lx.len() as f64, ly.iter().sum::<f64>() / ly.len() as f64);
    let exponent = lx.iter().zip(&ly).map(|(x, y)| (x - mlx) * (y - mly)).sum::<f64>()
        / lx.iter().map(|x| (x - mlx).powi(2)).sum::<f64>();
    let cubic_ok = exponent <= 3.5;

    outcome(
        linear_ok && cubic_ok,
        format!(
            "per-row ns at V=32..512: {:?}, measured/linear fit {:?} (limit 1.2x); spectrum precompute exponent in n_z {exponent:.2} (limit 3.5)",
            times.iter().map(|t| (t * 1e9).round()).collect::<Vec<_>>(),
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn ac12_basis_count() -> Outcome {
    // direct enumeration of conserving strings where feasible
    let mut ok = true;
    for v in 1..=10usize {
        let direct = verify::conserving_strings(v, v).len() as u64;
        ok &= operator_basis_count(v).to_u64() == Some(direct);
    }
    for v in 1..=20usize {
        ok &= operator_basis_count(v) == binomial(2 * v as u64, v as i64);
    }
    outcome(
        ok,
        "sector sum equals C(2V, V) exactly for V <= 20; direct enumeration agrees for V <= 10",
    )
}
