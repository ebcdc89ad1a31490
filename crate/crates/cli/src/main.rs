//! `frogld` — command-line front end for the frog-model large-deviation
//! toolkit.
//!
//! Every stochastic subcommand takes a mandatory `--seed` and is
//! byte-reproducible for a fixed seed regardless of `--threads`.  Results
//! are written atomically (temp file + rename); CSV columns are documented
//! in the per-subcommand `--help` text and stable across versions.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use frogld_core::covering::{check_cover, dyadic_cover, group_intervals, InnerLog, RunOracle};
use frogld_core::energy::{energy_perturbed, energy_total, energy_total_with, energy_windowed, EnergyOptions};
use frogld_core::hitting::prob_tau_geq;
use frogld_core::optim::minimize_energy;
use frogld_core::stats::linear_fit;
use frogld_core::{
    estimate_mu, estimate_tail_local, simulate_run, StepProfile, StepSource, TailEstimate,
};

#[derive(Parser)]
#[command(
    name = "frogld",
    about = "Frog-model upper-tail large deviations: simulation, energies, covering, rate estimation",
    version
)]
struct Cli {
    /// JSON config file mirroring the flags; explicit flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Flat JSON mirror of the flags.  Unknown keys are rejected.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    seed: Option<u64>,
    replicas: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    tol: Option<f64>,
    target: Option<i64>,
    budget: Option<u64>,
    n: Option<Vec<u64>>,
    big_m: Option<f64>,
    xi: Option<f64>,
    k_pos: Option<usize>,
    k_neg: Option<usize>,
    restarts: Option<u64>,
    delta: Option<f64>,
    window: Option<f64>,
    profile: Option<PathBuf>,
    inner_log: Option<InnerLog>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Domain(format!("config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Domain(format!("config {}: {e}", p.display())))
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one frog-model realization; emits the run as JSON.
    Simulate(SimulateArgs),
    /// Estimate the time constant μ; emits a JSON summary.
    Mu(MuArgs),
    /// Estimate the local upper tail P(T(0,⌊M√n⌋) ≥ ⌈ξn⌉); emits CSV with
    /// columns n,m,xi,replicas,hits,p_hat,ci_low,ci_high,rate,target,budget.
    Tail(TailArgs),
    /// Evaluate the energy E(f) of a step profile read from JSON.
    Energy(EnergyArgs),
    /// Variationally minimize the energy; emits the rate estimate as JSON.
    Optimize(OptimizeArgs),
    /// Simulate an environment, build the greedy dyadic cover of its Red
    /// blocks, and group the pieces; emits cover + groups as JSON.
    Cover(CoverArgs),
    /// Run the built-in invariant suites; exit 0 iff all pass.
    Verify(VerifyArgs),
    /// Merge artifact-emitted tail CSV files; with a grid of n values the
    /// output gains r2_sqrt_n and r2_n columns from least-squares fits of
    /// −log p̂ against √n and n.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Rightmost site to reach.
    #[arg(long)]
    target: Option<i64>,
    /// Censoring time budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (JSON); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MuArgs {
    /// Distance n for T(0,n)/n.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TailArgs {
    /// Scale parameter(s) n; comma-separated for a grid.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Distance multiplier M in T(0, ⌊M√n⌋).
    #[arg(long = "M")]
    big_m: Option<f64>,
    /// Budget multiplier ξ in the threshold ⌈ξn⌉.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output path (CSV); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnergyArgs {
    /// Step-profile JSON file {xi, pos_jumps: [[u,level],..], neg_jumps: [..]}.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Absolute quadrature tolerance (default 1e-4).
    #[arg(long)]
    tol: Option<f64>,
    /// Window half-width M: compute the windowed energy E_M instead.
    #[arg(long)]
    window: Option<f64>,
    /// Perturbation δ: with --window, compute the perturbed energy E⁺_{δ,M}.
    #[arg(long)]
    delta: Option<f64>,
    /// Output path (JSON report); the value is always printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Sup level ξ.
    #[arg(long)]
    xi: Option<f64>,
    /// Positive-side jump count.
    #[arg(long)]
    k_pos: Option<usize>,
    /// Negative-side jump count.
    #[arg(long)]
    k_neg: Option<usize>,
    #[arg(long)]
    restarts: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simplex-diameter stopping tolerance (default 1e-4).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    /// Environment size n (the cover lives in [0, n]).
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulation time budget (default 16 n).
    #[arg(long)]
    budget: Option<u64>,
    /// Base of the inner logarithm in the block exponent N = ⌈2 log₂ log n⌉
    /// ('natural' or 'base2'; default natural).
    #[arg(long, value_parser = parse_inner_log)]
    inner_log: Option<InnerLog>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Tail CSV files to merge (at least one).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_inner_log(s: &str) -> Result<InnerLog, String> {
    match s {
        "natural" | "e" => Ok(InnerLog::Natural),
        "base2" | "2" => Ok(InnerLog::Base2),
        other => Err(format!("inner log must be 'natural' or 'base2', got {other}")),
    }
}

enum CliError {
    Domain(String),
}

impl From<frogld_core::Error> for CliError {
    fn from(e: frogld_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(CliError::Domain(msg)) => {
            eprintln!("frogld: {msg}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("frogld: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Flag value if given, else config value, else a domain error naming the
/// missing key.
fn require<T: Clone>(flag: Option<T>, cfg: &Option<T>, name: &str) -> Result<T, CliError> {
    flag.or_else(|| cfg.clone())
        .ok_or_else(|| CliError::Domain(format!("missing required value --{name} (flag or config)")))
}

fn pick<T: Clone>(flag: Option<T>, cfg: &Option<T>) -> Option<T> {
    flag.or_else(|| cfg.clone())
}

/// Write atomically: temp file in the destination directory, then rename.
/// No partial files are left behind on failure.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .map_err(|e| CliError::Domain(format!("persist {}: {e}", path.display())))?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => atomic_write(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Run `f` inside a rayon pool of the requested size; the per-replica
/// seeding makes the result independent of the pool size.
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Domain(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a, cfg),
        Command::Mu(a) => cmd_mu(a, cfg),
        Command::Tail(a) => cmd_tail(a, cfg),
        Command::Energy(a) => cmd_energy(a, cfg),
        Command::Optimize(a) => cmd_optimize(a, cfg),
        Command::Cover(a) => cmd_cover(a, cfg),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a, cfg),
    }
}

fn cmd_simulate(a: SimulateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let target = require(a.target, &cfg.target, "target")?;
    let budget = require(a.budget, &cfg.budget, "budget")?;
    let seed = require(a.seed, &cfg.seed, "seed")?;
    let run = simulate_run(target, budget, &StepSource::seeded(seed))?;
    let mut json = serde_json::to_vec_pretty(&run)?;
    json.push(b'\n');
    emit(pick(a.out, &cfg.out).as_deref(), &json)
}

fn cmd_mu(a: MuArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let n = require(a.n, &cfg.n.as_ref().and_then(|v| v.first().copied()), "n")?;
    let replicas = require(a.replicas, &cfg.replicas, "replicas")?;
    let seed = require(a.seed, &cfg.seed, "seed")?;
    let est = with_threads(pick(a.threads, &cfg.threads), || {
        estimate_mu(n as i64, replicas, seed)
    })??;
    let mut json = serde_json::to_vec_pretty(&est)?;
    json.push(b'\n');
    emit(pick(a.out, &cfg.out).as_deref(), &json)
}

fn cmd_tail(a: TailArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let ns = require(a.n, &cfg.n, "n")?;
    let big_m = require(a.big_m, &cfg.big_m, "M")?;
    let xi = require(a.xi, &cfg.xi, "xi")?;
    let replicas = require(a.replicas, &cfg.replicas, "replicas")?;
    let seed = require(a.seed, &cfg.seed, "seed")?;
    let rows = with_threads(pick(a.threads, &cfg.threads), || {
        ns.iter()
            .map(|&n| estimate_tail_local(n, big_m, xi, replicas, seed))
            .collect::<Result<Vec<_>, _>>()
    })??;
    emit(pick(a.out, &cfg.out).as_deref(), &tail_csv(&rows)?)
}

fn tail_csv(rows: &[TailEstimate]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Domain(e.to_string()))
}

fn cmd_energy(a: EnergyArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let path = require(a.profile, &cfg.profile, "profile")?;
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Domain(format!("profile {}: {e}", path.display())))?;
    let f: StepProfile = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(format!("profile {}: {e}", path.display())))?;
    let window = pick(a.window, &cfg.window);
    let delta = pick(a.delta, &cfg.delta);
    let rep = match (window, delta) {
        (Some(m), Some(d)) => energy_perturbed(&f, d, m)?,
        (Some(m), None) => energy_windowed(&f, m)?,
        (None, None) => match pick(a.tol, &cfg.tol) {
            Some(tol) => {
                let opts = EnergyOptions {
                    tol,
                    ..EnergyOptions::default()
                };
                energy_total_with(&f, &opts)?
            }
            None => energy_total(&f)?,
        },
        (None, Some(_)) => {
            return Err(CliError::Domain(
                "--delta requires --window (perturbed energy is windowed)".into(),
            ))
        }
    };
    println!("value = {:.12}  abs_error = {:.3e}", rep.value, rep.abs_error);
    if let Some(out) = pick(a.out, &cfg.out) {
        let mut json = serde_json::to_vec_pretty(&rep)?;
        json.push(b'\n');
        atomic_write(&out, &json)?;
    }
    Ok(())
}

fn cmd_optimize(a: OptimizeArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let xi = require(a.xi, &cfg.xi, "xi")?;
    let k_pos = require(a.k_pos, &cfg.k_pos, "k-pos")?;
    let k_neg = pick(a.k_neg, &cfg.k_neg).unwrap_or(k_pos);
    let restarts = require(a.restarts, &cfg.restarts, "restarts")?;
    let seed = require(a.seed, &cfg.seed, "seed")?;
    let tol = pick(a.tol, &cfg.tol).unwrap_or(1e-4);
    let est = minimize_energy(xi, k_pos, k_neg, restarts, seed, tol)?;
    println!("r_hat = {:.6}  (xi = {xi}, k = {k_pos}+{k_neg})", est.r_hat);
    let mut json = serde_json::to_vec_pretty(&est)?;
    json.push(b'\n');
    emit(pick(a.out, &cfg.out).as_deref(), &json)
}

#[derive(Serialize)]
struct CoverReport {
    n: u64,
    seed: u64,
    budget: u64,
    cover: frogld_core::covering::IntervalCover,
    groups: frogld_core::covering::GroupedCover,
}

fn cmd_cover(a: CoverArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let n = require(a.n, &cfg.n.as_ref().and_then(|v| v.first().copied()), "n")?;
    let seed = require(a.seed, &cfg.seed, "seed")?;
    let budget = pick(a.budget, &cfg.budget).unwrap_or(16 * n);
    let inner = pick(a.inner_log, &cfg.inner_log).unwrap_or_default();
    let run = simulate_run(n as i64 + 256, budget, &StepSource::seeded(seed))?;
    let oracle = RunOracle::from_run(&run)?;
    let cover = dyadic_cover(&oracle, n as i64, inner)?;
    check_cover(&cover, &oracle)?;
    let intervals: Vec<(f64, f64)> = cover
        .pieces
        .iter()
        .map(|p| (p.s as f64, (p.t + p.l) as f64))
        .collect();
    let groups = group_intervals(&intervals, 8.0 * (n as f64).sqrt())?;
    let report = CoverReport {
        n,
        seed,
        budget,
        cover,
        groups,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    emit(pick(a.out, &cfg.out).as_deref(), &json)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let mut all = true;
    let mut suite = |name: &str, pass: bool, detail: String| {
        println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
        all &= pass;
    };
    verify::hitting(&mut suite);
    verify::profiles(&mut suite, a.seed);
    verify::energy(&mut suite);
    verify::covering(&mut suite);
    verify::determinism(&mut suite, a.seed);
    if all {
        Ok(())
    } else {
        Err(CliError::Domain("one or more invariant suites failed".into()))
    }
}

mod verify {
    use super::*;
    use frogld_core::covering::{check_cover, dyadic_cover_with, group_intervals, TableOracle};
    use frogld_core::energy::energy_windowed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn hitting(suite: &mut impl FnMut(&str, bool, String)) {
        // 2Φ(1) − 1, from an independent erf evaluation.
        const TWO_PHI1_M1: f64 = 0.682_689_492_137_085_9;
        let p = prob_tau_geq(1.0, 1.0).unwrap();
        let d = (p - TWO_PHI1_M1).abs();
        suite("hitting closed form", d < 1e-10, format!("|Δ| = {d:.2e}"));
        let u = 1e-3;
        let ratio = prob_tau_geq(u, 1.0).unwrap() / ((2.0 / std::f64::consts::PI).sqrt() * u);
        suite(
            "hitting small-u asymptote",
            (0.99..=1.0).contains(&ratio),
            format!("ratio = {ratio:.6}"),
        );
    }

    pub fn profiles(suite: &mut impl FnMut(&str, bool, String), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ok = true;
        for _ in 0..500 {
            let f = StepProfile::random(&mut rng, 1.0, 3, 2);
            let a = rng.gen_range(-3.0..2.0);
            let b = a + rng.gen_range(0.1..2.0);
            let g = f.soft_deform(&[(a, b)]).unwrap();
            let (_, _, delta) = f.delta_height(a, b).unwrap();
            for _ in 0..10 {
                let x = rng.gen_range(-8.0..8.0);
                let y = rng.gen_range(-8.0..8.0);
                ok &= g.evaluate(x) >= f.evaluate(x) - delta - 1e-12;
                ok &= (g.evaluate(x) - g.evaluate(y)).max(0.0)
                    <= (f.evaluate(x) - f.evaluate(y)).max(0.0) + 1e-12;
            }
            ok &= g.validate().is_ok();
        }
        suite("profile deformation", ok, "500 random instances".into());
    }

    pub fn energy(suite: &mut impl FnMut(&str, bool, String)) {
        // −∫ log(2Φ(u)−1) du over (0, ∞), from the pre-build 1-D oracle.
        const ONE_JUMP: f64 = 1.462_884_530_364_854_4;
        let f = StepProfile::new(1.0, vec![(1.0, 1.0)], vec![]).unwrap();
        let rep = energy_total(&f).unwrap();
        let rel = (rep.value - ONE_JUMP).abs() / ONE_JUMP;
        suite("energy one-jump", rel < 5e-3, format!("rel = {rel:.2e}"));
        let win = energy_windowed(&f, 4.0).unwrap();
        suite(
            "energy windowed ≤ total",
            win.value <= rep.value + rep.abs_error + win.abs_error,
            format!("E_M = {:.6}, E = {:.6}", win.value, rep.value),
        );
    }

    pub fn covering(suite: &mut impl FnMut(&str, bool, String)) {
        // Single bad interval: T(16, 4) = 16 ≥ 4² forces one radius-4 piece.
        let oracle =
            TableOracle::with_entries((0, 1 << 12), vec![((16, 4), 16)]).unwrap();
        let cover = dyadic_cover_with(&oracle, 1024, 2).unwrap();
        let ok = check_cover(&cover, &oracle).is_ok() && cover.ell == 1;
        suite("covering single bad site", ok, format!("ℓ = {}", cover.ell));
        let grouped = group_intervals(&[(0.0, 4.0), (5.0, 9.0), (40.0, 44.0)], 10.0);
        suite(
            "interval grouping",
            grouped.map(|g| g.intervals.len() == 2).unwrap_or(false),
            "gap-10 chaining".into(),
        );
    }

    pub fn determinism(suite: &mut impl FnMut(&str, bool, String), seed: u64) {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_tail_local(16, 1.0, 1.0, 20_000, seed).unwrap())
        };
        let (a, b) = (run(1), run(4));
        suite(
            "tail determinism across thread counts",
            a.p_hat.to_bits() == b.p_hat.to_bits() && a.hits == b.hits,
            format!("p̂ = {}", a.p_hat),
        );
    }
}

// Flat copy of the tail columns plus the fit columns; the csv serializer
// does not support `serde(flatten)`.
#[derive(Serialize)]
struct ReportRow {
    n: u64,
    m: f64,
    xi: f64,
    replicas: u64,
    hits: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    rate: Option<f64>,
    target: i64,
    budget: u64,
    r2_sqrt_n: Option<f64>,
    r2_n: Option<f64>,
}

fn cmd_report(a: ReportArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let out = pick(a.out, &cfg.out);
    if a.inputs.len() == 1 {
        // Single input: pass-through.
        let bytes = fs::read(&a.inputs[0])
            .map_err(|e| CliError::Domain(format!("{}: {e}", a.inputs[0].display())))?;
        return emit(out.as_deref(), &bytes);
    }
    let mut rows: Vec<TailEstimate> = Vec::new();
    for path in &a.inputs {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        for rec in rdr.deserialize() {
            let row: TailEstimate =
                rec.map_err(|e| CliError::Domain(format!("{}: schema mismatch: {e}", path.display())))?;
            rows.push(row);
        }
    }
    rows.sort_by_key(|r| r.n);
    // Least-squares fits of −log p̂ against √n and against n over the
    // positive-probability rows.
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.p_hat > 0.0)
        .map(|r| (r.n as f64, -r.p_hat.ln()))
        .collect();
    let (r2_sqrt_n, r2_n) = if pts.len() >= 2 {
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0.sqrt()).collect();
        let xl: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let (_, _, rs) = linear_fit(&xs, &y);
        let (_, _, rl) = linear_fit(&xl, &y);
        (Some(rs), Some(rl))
    } else {
        (None, None)
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in rows {
        w.serialize(ReportRow {
            n: t.n,
            m: t.m,
            xi: t.xi,
            replicas: t.replicas,
            hits: t.hits,
            p_hat: t.p_hat,
            ci_low: t.ci_low,
            ci_high: t.ci_high,
            rate: t.rate,
            target: t.target,
            budget: t.budget,
            r2_sqrt_n,
            r2_n,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Domain(e.to_string()))?;
    emit(out.as_deref(), &bytes)
}
