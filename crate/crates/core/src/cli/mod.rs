//! Command implementations behind the `allpairs` binary.
//!
//! Every file written here carries the run configuration and crate version:
//! CSV files as leading `#` lines, JSON reports under `"config"`, shadow tables
//! in the header's `meta` field.
//!
//! A state file is `{"V": 4, "N": 2, "amplitudes": [[re, im], ...]}` with one
//! amplitude per configuration of `N` particles, configurations in increasing
//! order of their occupation bit pattern (site `k` is bit `k`).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::channel::{self, SpectrumCache};
use crate::error::{Error, Result};
use crate::estimator::{estimate, mean_and_std, row_values_many, Method, Observable, ShadowTable};
use crate::gates::GateEnsemble;
use crate::opstrings::{Letter, OperatorString};
use crate::simulator::{collect_shadow, ground_state, FockBasis, FockState, LadderModel, LanczosOptions};
use crate::verify::{self, Level};
use crate::C64;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "allpairs", version, about = "All-Pairs classical shadows for hardcore bosons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Channel spectrum of one sector, or the large-V sweep.
    Spectrum(SpectrumArgs),
    /// Run the protocol on a ladder ground state or a state file.
    Sample(SampleArgs),
    /// Estimate an observable from a shadow table.
    Estimate(EstimateArgs),
    /// Exact and shadow correlators of the ladder ground state.
    Demo(DemoArgs),
    /// Run the oracle suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Number of sites.
    #[arg(long, default_value_t = 8)]
    pub volume: usize,
    /// Number of Z letters.
    #[arg(long, default_value_t = 1)]
    pub n_z: usize,
    /// Emit `c_λ₂` against `V` instead of one sector.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 16)]
    pub min_volume: usize,
    #[arg(long, default_value_t = 512)]
    pub max_volume: usize,
    #[arg(long, default_value_t = 6)]
    pub max_lambda: usize,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 12)]
    pub rungs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.5)]
    pub u_int: f64,
}

impl ModelArgs {
    pub fn model(&self) -> LadderModel {
        LadderModel::new(self.rungs, self.t, self.u_int)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// State file to sample instead of the ladder ground state.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value = "discrete3")]
    pub ensemble: GateEnsemble,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Table path; `.gz` compresses.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub observable: PathBuf,
    /// Median of means over this many groups instead of the plain mean.
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DemoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "discrete3")]
    pub ensemble: GateEnsemble,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub tables: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives `correlators.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyLevel::Fast)]
    pub verify_level: VerifyLevel,
    /// JSON-lines report; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A validated command together with the producing crate version.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub code_version: &'static str,
}

impl RunConfig {
    pub fn new(command: Command) -> Result<Self> {
        let cfg = Self {
            command,
            code_version: CODE_VERSION,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match &self.command {
            Command::Spectrum(a) if a.sweep => {
                if a.min_volume < 2 || a.min_volume > a.max_volume {
                    return bad(format!("volume range {}..{} is empty", a.min_volume, a.max_volume));
                }
            }
            Command::Spectrum(a) => {
                if a.volume == 0 || a.volume % 2 == 1 {
                    return bad(format!("volume must be even and positive, got {}", a.volume));
                }
                if a.n_z > a.volume {
                    return bad(format!("n_z = {} exceeds the volume {}", a.n_z, a.volume));
                }
            }
            Command::Sample(a) => {
                if a.samples == 0 {
                    return bad("--samples must be positive".into());
                }
                if a.state.is_none() {
                    check_model(&a.model)?;
                }
            }
            Command::Estimate(a) => {
                if a.groups == Some(0) {
                    return bad("--groups must be positive".into());
                }
            }
            Command::Demo(a) => {
                check_model(&a.model)?;
                if a.samples == 0 || a.tables == 0 {
                    return bad("--samples and --tables must be positive".into());
                }
            }
            Command::Verify(_) => {}
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    fn csv_preamble(&self) -> String {
        format!("# allpairs {}\n# config: {}\n", CODE_VERSION, self.to_json())
    }
}

fn check_model(m: &ModelArgs) -> Result<()> {
    if m.rungs == 0 {
        return Err(Error::InvalidArgument("--rungs must be positive".into()));
    }
    if !(m.t.is_finite() && m.u_int.is_finite()) {
        return Err(Error::InvalidArgument("couplings must be finite".into()));
    }
    m.model().particles().map(|_| ())
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::new(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cfg) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Run a validated command. `Ok(false)` means a verification check failed.
pub fn execute(cfg: &RunConfig) -> Result<bool> {
    match &cfg.command {
        Command::Spectrum(a) => {
            let mut w = output(a.out.as_deref())?;
            w.write_all(cfg.csv_preamble().as_bytes())?;
            if a.sweep {
                write_sweep(&mut w, a)?;
            } else {
                write_spectrum(&mut w, a.volume, a.n_z)?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Sample(a) => {
            let state = match &a.state {
                Some(p) => load_state(p)?,
                None => ground_state(&a.model.model(), &LanczosOptions::default())?.1,
            };
            let table = collect_shadow(&state, a.ensemble, a.samples, a.seed)?.with_meta(cfg.to_json());
            table.save(&a.out)?;
            Ok(true)
        }
        Command::Estimate(a) => {
            let table = ShadowTable::load(&a.table)?;
            let text = std::fs::read_to_string(&a.observable)?;
            let obs = Observable::from_json(&text, table.volume())?;
            let method = match a.groups {
                Some(groups) => Method::MedianOfMeans { groups },
                None => Method::Mean,
            };
            let report = estimate(&table, &obs, method, &SpectrumCache::new())?.report(&obs);
            let mut value = serde_json::to_value(&report)?;
            value["config"] = cfg.to_json();
            let mut w = output(a.out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &value)?;
            w.write_all(b"\n")?;
            w.flush()?;
            Ok(true)
        }
        Command::Demo(a) => {
            std::fs::create_dir_all(&a.out)?;
            let demo = correlators(&a.model.model(), a.ensemble, a.samples, a.tables, a.seed)?;
            let mut w = BufWriter::new(File::create(a.out.join("correlators.csv"))?);
            w.write_all(cfg.csv_preamble().as_bytes())?;
            writeln!(w, "# ground_energy: {}", demo.energy)?;
            demo.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Verify(a) => {
            let level = match a.verify_level {
                VerifyLevel::Fast => Level::Fast,
                VerifyLevel::Full => Level::Full,
            };
            let results = verify::run(level)?;
            let mut w = output(a.out.as_deref())?;
            for r in &results {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            let summary = json!({
                "summary": { "checks": results.len(), "failed": failed },
                "config": cfg.to_json(),
            });
            serde_json::to_writer(&mut w, &summary)?;
            w.write_all(b"\n")?;
            w.flush()?;
            Ok(failed == 0)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV with columns `V,n_z,d_or_lambda2,alpha,c,beta`; short columns are left empty.
pub fn write_spectrum<W: Write>(w: &mut W, volume: usize, n_z: usize) -> Result<()> {
    let alpha = channel::alpha_vec(volume, n_z);
    let c = channel::eigenvalues(volume, n_z);
    let beta = channel::beta_vec(volume, n_z)?;
    let cell = |v: &[f64], k: usize| v.get(k).map(|x| format!("{x:e}")).unwrap_or_default();
    writeln!(w, "V,n_z,d_or_lambda2,alpha,c,beta")?;
    for k in 0..alpha.len().max(c.len()) {
        writeln!(
            w,
            "{volume},{n_z},{k},{},{},{}",
            cell(&alpha, k),
            cell(&c, k),
            cell(&beta, k)
        )?;
    }
    Ok(())
}

/// CSV with columns `V,lambda2,c,limit,gap` over doubling volumes.
pub fn write_sweep<W: Write>(w: &mut W, a: &SpectrumArgs) -> Result<()> {
    writeln!(w, "V,lambda2,c,limit,gap")?;
    let mut v = a.min_volume + a.min_volume % 2;
    while v <= a.max_volume {
        for l2 in 1..=a.max_lambda.min(v / 2) {
            let c = channel::eigenvalue_closed_form(v, l2);
            let limit = (2.0f64 / 3.0).powi(l2 as i32);
            writeln!(w, "{v},{l2},{c:e},{limit:e},{:e}", (c - limit).abs())?;
        }
        v *= 2;
    }
    Ok(())
}

#[derive(Deserialize)]
struct StateFile {
    #[serde(rename = "V")]
    volume: usize,
    #[serde(rename = "N")]
    particles: usize,
    amplitudes: Vec<[f64; 2]>,
}

/// Read a state file.
pub fn load_state(path: &Path) -> Result<FockState> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text)
}

pub fn parse_state(text: &str) -> Result<FockState> {
    let f: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let basis = Arc::new(FockBasis::new(f.volume, f.particles)?);
    if f.amplitudes.len() != basis.dim() {
        return Err(Error::Parse(format!(
            "state file has {} amplitudes, sector has {}",
            f.amplitudes.len(),
            basis.dim()
        )));
    }
    FockState::new(basis, f.amplitudes.iter().map(|a| C64::new(a[0], a[1])).collect())
}

/// Serialise a state in the state-file format.
pub fn state_json(state: &FockState) -> String {
    json!({
        "V": state.volume(),
        "N": state.particles(),
        "amplitudes": state.amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
    })
    .to_string()
}

/// Translation-averaged `(a†_i a_{i+r} + h.c.)/2` on both legs, or the density at `r = 0`.
pub fn single_correlator(model: &LadderModel, r: usize) -> Observable {
    let v = model.volume();
    let mut obs = Observable::new(v);
    let w = 1.0 / (2 * model.rungs) as f64;
    for i in 0..model.rungs {
        for leg in [LadderModel::site_a, LadderModel::site_b] {
            let (x, y) = (leg(model, i), leg(model, i + r));
            if r == 0 {
                obs.push(C64::new(0.5 * w, 0.0), OperatorString::identity(v)).unwrap();
                obs.push(C64::new(-0.5 * w, 0.0), string(v, &[(x, Letter::Z)])).unwrap();
            } else {
                let s = string(v, &[(x, Letter::Raise), (y, Letter::Lower)]);
                push_hermitian_half(&mut obs, w, s);
            }
        }
    }
    obs
}

/// Translation-averaged `(a†_i b†_i a_{i+r} b_{i+r} + h.c.)/2`, or `n^a_i n^b_i` at `r = 0`.
pub fn pair_correlator(model: &LadderModel, r: usize) -> Observable {
    let v = model.volume();
    let mut obs = Observable::new(v);
    let w = 1.0 / model.rungs as f64;
    for i in 0..model.rungs {
        let (a0, b0) = (model.site_a(i), model.site_b(i));
        if r == 0 {
            let q = C64::new(0.25 * w, 0.0);
            obs.push(q, OperatorString::identity(v)).unwrap();
            obs.push(-q, string(v, &[(a0, Letter::Z)])).unwrap();
            obs.push(-q, string(v, &[(b0, Letter::Z)])).unwrap();
            obs.push(q, string(v, &[(a0, Letter::Z), (b0, Letter::Z)])).unwrap();
        } else {
            let (a1, b1) = (model.site_a(i + r), model.site_b(i + r));
            let s = string(
                v,
                &[(a0, Letter::Raise), (b0, Letter::Raise), (a1, Letter::Lower), (b1, Letter::Lower)],
            );
            push_hermitian_half(&mut obs, w, s);
        }
    }
    obs
}

fn string(v: usize, letters: &[(usize, Letter)]) -> OperatorString {
    OperatorString::new(v, letters.iter().copied()).expect("sites in range")
}

fn push_hermitian_half(obs: &mut Observable, w: f64, s: OperatorString) {
    let adj = s.adjoint();
    obs.push(C64::new(0.5 * w, 0.0), s).unwrap();
    obs.push(C64::new(0.5 * w, 0.0), adj).unwrap();
}

/// One separation of the correlator demo.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorrelatorRow {
    pub r: usize,
    pub exact_single: f64,
    pub exact_pair: f64,
    pub shadow_single: f64,
    /// Standard deviation of the per-table means.
    pub shadow_single_std: f64,
    pub shadow_pair: f64,
    pub shadow_pair_std: f64,
}

#[derive(Debug, Clone)]
pub struct Demo {
    pub energy: f64,
    pub tables: usize,
    pub rows: Vec<CorrelatorRow>,
}

impl Demo {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "r,exact_single,exact_pair,shadow_single,shadow_single_std,shadow_pair,shadow_pair_std"
        )?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                row.r,
                row.exact_single,
                row.exact_pair,
                row.shadow_single,
                row.shadow_single_std,
                row.shadow_pair,
                row.shadow_pair_std
            )?;
        }
        Ok(())
    }
}

/// Ground-state correlators for separations `0..=rungs/2`, exact and from
/// `tables` independent shadow tables. Table `k` uses seed `seed + k`.
pub fn correlators(
    model: &LadderModel,
    ensemble: GateEnsemble,
    samples: usize,
    tables: usize,
    seed: u64,
) -> Result<Demo> {
    let (energy, psi) = ground_state(model, &LanczosOptions::default())?;
    let seps: Vec<usize> = (0..=model.rungs / 2).collect();
    let mut observables = Vec::new();
    for &r in &seps {
        observables.push(single_correlator(model, r));
        observables.push(pair_correlator(model, r));
    }
    let exact: Vec<f64> = observables
        .iter()
        .map(|o| {
            o.terms
                .iter()
                .map(|(c, s)| psi.expectation(s).map(|e| (c * e).re))
                .sum::<Result<f64>>()
        })
        .collect::<Result<_>>()?;
    let cache = SpectrumCache::new();
    let mut means: Vec<Vec<C64>> = vec![Vec::with_capacity(tables); observables.len()];
    for k in 0..tables {
        let table = collect_shadow(&psi, ensemble, samples, seed.wrapping_add(k as u64))?;
        for (m, values) in means.iter_mut().zip(row_values_many(&table, &observables, &cache)?) {
            m.push(mean_and_std(&values).0);
        }
    }
    let stats: Vec<(f64, f64)> = means
        .iter()
        .map(|m| {
            let (mean, sd) = mean_and_std(m);
            (mean.re, sd[0])
        })
        .collect();
    let rows = seps
        .iter()
        .enumerate()
        .map(|(k, &r)| CorrelatorRow {
            r,
            exact_single: exact[2 * k],
            exact_pair: exact[2 * k + 1],
            shadow_single: stats[2 * k].0,
            shadow_single_std: stats[2 * k].1,
            shadow_pair: stats[2 * k + 1].0,
            shadow_pair_std: stats[2 * k + 1].1,
        })
        .collect();
    Ok(Demo { energy, tables, rows })
}
