//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on a
//! usage or configuration error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{cov_kernel, phi, psi, simulate_limit_diffusion, DiffusionMethod, DiffusionPath};
use crate::error::{Error, Result};
use crate::model::{simulate_insertion, simulate_pool, simulate_urn, ModelParams, SeedSpec, Trajectory};
use crate::moments::MomentTable;
use crate::numeric::{NumericMode, Scalar};
use crate::verify::{Check, GofReport, SuiteParams, Thresholds, Verifier};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "growthlab", version, about = "Simulate the pool-sampled random graph process, tabulate its exact moments and limit curves, and verify them")]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate trajectories `X_1..X_N` and the final increment.
    Simulate(SimulateArgs),
    /// Exact mean and variance of `X_n` for `n = 1..N`.
    Moments(MomentsArgs),
    /// The limit curves `φ`, `ψ` and the covariance kernel on a grid.
    Limits(LimitsArgs),
    /// Sample paths of the limit diffusion.
    Diffusion(DiffusionArgs),
    /// Run verification checks and print a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    Urn,
    Pool,
    Insertion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Euler,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "N")]
    pub vertices: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long, env = "GROWTHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Defaults to `pool` with `--track-edges`, `urn` otherwise.
    #[arg(long, value_enum)]
    pub sampler: Option<Sampler>,
    /// Record every edge occupancy (pool sampler, JSON output).
    #[arg(long)]
    pub track_edges: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long = "N")]
    pub vertices: u64,
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    pub numeric_mode: Mode,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Comma-separated increasing times in [0, 1].
    #[arg(long, alias = "t", value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub t_ref: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DiffusionArgs {
    /// Comma-separated increasing times in [0, 1], starting at 0.
    #[arg(long, alias = "t", value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub t_grid: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    #[arg(long, env = "GROWTHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    /// Euler: distance from 1 at which integration stops.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Euler: time step.
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated checks; all of them when absent.
    #[arg(long, value_delimiter = ',', value_parser = parse_check)]
    pub suite: Vec<Check>,
    /// Overrides the default `N` of every selected check.
    #[arg(long = "N")]
    pub vertices: Option<u64>,
    /// Overrides the default replicate count of every selected check.
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long, env = "GROWTHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// JSON file with threshold overrides.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Also compare `Y_N(0.5)` with the limit diffusion.
    #[arg(long)]
    pub compare_diffusion: bool,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_check(s: &str) -> std::result::Result<Check, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return EXIT_USAGE;
        }
    };
    match pool.install(|| run(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(a).map(|_| EXIT_OK),
        Command::Moments(a) => moments(a).map(|_| EXIT_OK),
        Command::Limits(a) => limits(a).map(|_| EXIT_OK),
        Command::Diffusion(a) => diffusion(a).map(|_| EXIT_OK),
        Command::Verify(a) => verify(a),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::InvalidParams(format!("cannot write to standard output: {e}")))
        }
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParams(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidParams("--reps must be at least 1".into()));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let ok = !grid.is_empty()
        && grid.iter().all(|t| (0.0..=1.0).contains(t))
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams("--t-grid must be increasing values in [0, 1]".into()))
    }
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let params = ModelParams::new(a.vertices)?;
    check_reps(a.reps)?;
    let sampler = a.sampler.unwrap_or(if a.track_edges { Sampler::Pool } else { Sampler::Urn });
    if a.track_edges && (sampler != Sampler::Pool || a.output.format != Format::Json) {
        return Err(Error::InvalidParams("--track-edges needs the pool sampler and --format json".into()));
    }
    let paths: Vec<Trajectory> = (0..a.reps)
        .into_par_iter()
        .map(|r| {
            let seed = SeedSpec::new(a.seed, r);
            match sampler {
                Sampler::Urn => Ok(simulate_urn(&params, seed)),
                Sampler::Pool => simulate_pool(&params, seed, a.track_edges),
                Sampler::Insertion => simulate_insertion(&params, seed).to_trajectory(params),
            }
        })
        .collect::<Result<_>>()?;
    let text = match a.output.format {
        Format::Json => to_json(&paths)?,
        Format::Csv => {
            let mut s = String::from("replicate,n,x_n,delta_last\n");
            for (r, p) in paths.iter().enumerate() {
                for (i, x) in p.x.iter().enumerate() {
                    let _ = writeln!(s, "{r},{},{x},", i + 1);
                }
                let _ = writeln!(s, "{r},{},{},{}", a.vertices + 1, params.total_edges(), p.delta_last);
            }
            s
        }
    };
    emit(&a.output.out, &text)
}

#[derive(Serialize)]
struct MomentRow<V> {
    n: u64,
    mu: V,
    sigma2: V,
}

#[derive(Serialize)]
struct MomentDump<V> {
    vertices: u64,
    mode: NumericMode,
    rows: Vec<MomentRow<V>>,
}

fn moment_rows<T: Scalar, V>(t: &MomentTable<T>, f: impl Fn(&T) -> V) -> Vec<MomentRow<V>> {
    (1..=t.vertices).map(|n| MomentRow { n, mu: f(t.mean(n)), sigma2: f(t.variance(n)) }).collect()
}

fn moments(a: &MomentsArgs) -> Result<()> {
    ModelParams::new(a.vertices)?;
    let text = match a.numeric_mode {
        Mode::Float => {
            let t = MomentTable::float(a.vertices)?;
            moment_text(a.output.format, a.vertices, NumericMode::CompensatedFloat, moment_rows(&t, |v| *v))?
        }
        Mode::Rational => {
            let t = MomentTable::<BigRational>::compute(a.vertices)?;
            moment_text(a.output.format, a.vertices, NumericMode::Rational, moment_rows(&t, |v| v.to_string()))?
        }
    };
    emit(&a.output.out, &text)
}

fn moment_text<V: Serialize + std::fmt::Display>(
    format: Format,
    vertices: u64,
    mode: NumericMode,
    rows: Vec<MomentRow<V>>,
) -> Result<String> {
    match format {
        Format::Json => to_json(&MomentDump { vertices, mode, rows }),
        Format::Csv => {
            let mut s = String::from("n,mu,sigma2\n");
            for r in rows {
                let _ = writeln!(s, "{},{},{}", r.n, r.mu, r.sigma2);
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct LimitRow {
    t: f64,
    phi: f64,
    psi: f64,
    cov: f64,
}

fn limits(a: &LimitsArgs) -> Result<()> {
    check_grid(&a.t_grid)?;
    if !(0.0..=1.0).contains(&a.t_ref) {
        return Err(Error::InvalidParams(format!("--t-ref {} outside [0, 1]", a.t_ref)));
    }
    let rows: Vec<LimitRow> = a
        .t_grid
        .iter()
        .map(|&t| {
            Ok(LimitRow { t, phi: phi(t)?, psi: psi(t)?, cov: cov_kernel(t.min(a.t_ref), t.max(a.t_ref))? })
        })
        .collect::<Result<_>>()?;
    let text = match a.output.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("t,phi,psi,cov\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", r.t, r.phi, r.psi, r.cov);
            }
            s
        }
    };
    emit(&a.output.out, &text)
}

fn diffusion(a: &DiffusionArgs) -> Result<()> {
    check_grid(&a.t_grid)?;
    check_reps(a.reps)?;
    let method = match a.method {
        Method::Exact => DiffusionMethod::Exact,
        Method::Euler => DiffusionMethod::Euler { delta: a.delta, step: a.step },
    };
    let paths: Vec<DiffusionPath> = (0..a.reps)
        .into_par_iter()
        .map(|r| simulate_limit_diffusion(&a.t_grid, SeedSpec::new(a.seed, r), method))
        .collect::<Result<_>>()?;
    let text = match a.output.format {
        Format::Json => to_json(&paths)?,
        Format::Csv => {
            let mut s = String::from("replicate,t,y\n");
            for (r, p) in paths.iter().enumerate() {
                for (t, y) in p.grid.iter().zip(&p.y) {
                    let _ = writeln!(s, "{r},{t},{y}");
                }
            }
            s
        }
    };
    emit(&a.output.out, &text)
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    let thresholds = match &a.thresholds {
        None => Thresholds::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParams(format!("bad thresholds in {}: {e}", path.display())))?
        }
    };
    if let Some(n) = a.vertices {
        ModelParams::new(n)?;
    }
    let verifier = Verifier { seed: a.seed, thresholds, compare_diffusion: a.compare_diffusion };
    let params = SuiteParams { vertices: a.vertices, reps: a.reps };
    let suite: Vec<Check> = if a.suite.is_empty() { Check::ALL.to_vec() } else { a.suite.clone() };
    let mut reports: Vec<GofReport> = Vec::new();
    for check in suite {
        let batch = verifier.run(check, params)?;
        for r in &batch {
            eprintln!("{} {}: {} = {:.6e}", if r.passed() { "PASS" } else { "FAIL" }, r.check, stat_name(r), r.statistic);
        }
        reports.extend(batch);
    }
    emit(&a.out, &to_json(&reports)?)?;
    Ok(if reports.iter().all(GofReport::passed) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn stat_name(r: &GofReport) -> String {
    match r.p_value {
        Some(p) => format!("statistic (p = {p:.4})"),
        None => "statistic".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_flags() {
        let cli = Cli::try_parse_from(["growthlab", "verify", "--suite", "martingales,moments", "--N", "100", "--reps", "10"]).unwrap();
        match cli.command {
            Command::Verify(v) => {
                assert_eq!(v.suite, vec![Check::Martingales, Check::Moments]);
                assert_eq!(v.vertices, Some(100));
            }
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::try_parse_from(["growthlab", "limits", "--t", "0,1"]).unwrap();
        match cli.command {
            Command::Limits(l) => assert_eq!(l.t_grid, vec![0.0, 1.0]),
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["growthlab", "moments"]), EXIT_USAGE);
        assert_eq!(run_from(["growthlab", "moments", "--N", "1"]), EXIT_USAGE);
        assert_eq!(run_from(["growthlab", "verify", "--suite", "nope"]), EXIT_USAGE);
        assert_eq!(run_from(["growthlab", "limits", "--t", "0.5,0.2"]), EXIT_USAGE);
        assert_eq!(run_from(["growthlab", "simulate", "--N", "5", "--track-edges"]), EXIT_USAGE);
    }
}
