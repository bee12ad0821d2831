//! `tailchain`: tail-index solver, tail-chain estimators, brute-force oracle
//! and the non-uniqueness counterexample from the command line.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 I/O error,
//! 4 numerical failure.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tailchain_core::counterexample::accumulation_point_experiment;
use tailchain_core::estimators::{
    blocks_estimator, estimate_chi, estimate_gamma, estimate_theta, table1_row, write_table1_csv, ReturnSeries,
    DEFAULT_M, TABLE1_ROWS,
};
use tailchain_core::garch_chain::{Conditioning, GarchTailChain};
use tailchain_core::oracle::{conditional_empirics, PathSimConfig};
use tailchain_core::streams::{with_workers, PathStreams, DEFAULT_SEED};
use tailchain_core::tail_index::{solve_tail_index, GarchParams};
use tailchain_core::Error;

#[derive(Parser, Debug)]
#[command(name = "tailchain", version, about = "Tail-chain simulation and extremal-index estimation for GARCH(1,1)")]
struct Cli {
    /// Flat key=value file with flag names as keys; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve E[(alpha1 eps^2 + beta1)^alpha] = 1 for the tail index alpha.
    Alpha(AlphaArgs),
    /// Extremal index, extremal coefficients and cluster-onset coefficients for a set of models.
    Table1(Table1Args),
    /// One tail-chain estimate (theta, chi or gamma) as JSON.
    Estimate(EstimateArgs),
    /// Blocks estimator of the extremal index for a return series.
    Blocks(BlocksArgs),
    /// One tail-chain path as CSV rows t,sigma,zeta.
    Simulate(SimulateArgs),
    /// Brute-force conditional empirics on a long simulated GARCH path.
    Oracle(OracleArgs),
    /// Exact conditional laws for the non-uniqueness counterexample.
    Counterexample(CounterexampleArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Constant of the variance recursion (scale only; does not affect the tail chain).
    #[arg(long, default_value_t = 1e-6)]
    alpha0: f64,
    #[arg(long)]
    alpha1: f64,
    #[arg(long)]
    beta1: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<GarchParams, Error> {
        GarchParams::new(self.alpha0, self.alpha1, self.beta1)
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct AlphaArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct Table1Args {
    /// Number of tail-chain replications per model.
    #[arg(long = "N", default_value_t = 10_000)]
    n_reps: usize,
    /// Cluster horizon (lags before and after 0).
    #[arg(long, short = 'm', default_value_t = DEFAULT_M)]
    m: usize,
    /// Models as alpha1,beta1 (repeatable); default: the seven reference models.
    #[arg(long = "rows", value_parser = parse_row)]
    rows: Vec<(f64, f64)>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Theta,
    Chi,
    Gamma,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(value_enum)]
    quantity: Quantity,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "N", default_value_t = 10_000)]
    n_reps: usize,
    #[arg(long, short = 'm', default_value_t = DEFAULT_M)]
    m: usize,
    /// Lag for chi and gamma (negative lags allowed for chi).
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    h: i64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct BlocksArgs {
    /// CSV file with one numeric column and an optional header.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long = "block-len", default_value_t = 126)]
    block_len: usize,
    /// Threshold as an empirical quantile, in (0.5, 1).
    #[arg(long, visible_alias = "q", default_value_t = 0.95)]
    quantile: f64,
    /// Seed of the block bootstrap.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Backward lags.
    #[arg(long, short = 'm', default_value_t = 10)]
    m: usize,
    /// Forward lags.
    #[arg(long, short = 'n', default_value_t = 10)]
    n: usize,
    /// Condition on |zeta_0| > x instead of zeta_0 > x.
    #[arg(long)]
    two_sided: bool,
    /// Path index within the seed's stream family.
    #[arg(long, default_value_t = 0)]
    path: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Path length; accepts float notation such as 1e7.
    #[arg(long = "len", default_value = "1e7", value_parser = parse_count)]
    length: usize,
    #[arg(long = "burn-in", default_value_t = 10_000)]
    burn_in: usize,
    /// Threshold as an empirical quantile of zeta, in (0.99, 1).
    #[arg(long, visible_alias = "q", default_value_t = 0.999)]
    quantile: f64,
    /// Largest lag for chi and gamma.
    #[arg(long, default_value_t = 3)]
    h: usize,
    #[arg(long, short = 'm', default_value_t = DEFAULT_M)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    /// Threshold sequence c * 5^i; c = 1 or c in [3, 5).
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    #[arg(long, default_value_t = 8)]
    levels: u32,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_row(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected alpha1,beta1, got {s:?}"))?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e15) {
        return Err(format!("expected a positive whole number, got {s}"));
    }
    Ok(v as usize)
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(Error::Io(_)) => 3,
            CliError::Core(e) if e.is_parameter_error() => 2,
            CliError::Core(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn open_output(out: &OutputArgs) -> CliResult<Box<dyn Write>> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(out: &OutputArgs, value: &T) -> CliResult {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_alpha(a: &AlphaArgs) -> CliResult {
    let params = a.model.params()?;
    let tail = solve_tail_index(&params)?;
    match a.out.format {
        Some(Format::Json) => write_json(
            &a.out,
            &json!({"params": params, "alpha": tail.alpha, "two_alpha": tail.two_alpha(), "residual": tail.residual}),
        ),
        Some(Format::Csv) => {
            let mut w = open_output(&a.out)?;
            writeln!(w, "alpha1,beta1,alpha\n{},{},{}", params.alpha1, params.beta1, tail.alpha)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let mut w = open_output(&a.out)?;
            writeln!(w, "{:.3}", tail.alpha)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_table1(a: &Table1Args) -> CliResult {
    let rows = if a.rows.is_empty() { TABLE1_ROWS.to_vec() } else { a.rows.clone() };
    let mut out = Vec::with_capacity(rows.len());
    for (a1, b1) in rows {
        let start = Instant::now();
        let params = GarchParams::tail(a1, b1)?;
        let tail = solve_tail_index(&params)?;
        let chain = GarchTailChain::new(params, tail)?;
        let row = with_workers(a.workers, || table1_row(&chain, a.n_reps, a.m, a.seed))?;
        eprintln!(
            "alpha1={a1} beta1={b1}: alpha={:.3} theta={:.3} ({:.2}s)",
            row.alpha,
            row.theta.estimate,
            start.elapsed().as_secs_f64()
        );
        out.push(row);
    }
    match a.out.format {
        Some(Format::Json) => write_json(&a.out, &out),
        _ => {
            let mut w = open_output(&a.out)?;
            write_table1_csv(&out, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult {
    let params = a.model.params()?;
    let tail = solve_tail_index(&params)?;
    let chain = GarchTailChain::new(params, tail)?;
    let report = with_workers(a.workers, || match a.quantity {
        Quantity::Theta => estimate_theta(&chain, a.m, a.n_reps, a.seed),
        Quantity::Chi => estimate_chi(&chain, a.h, a.n_reps, a.seed),
        Quantity::Gamma => estimate_gamma(&chain, a.h, a.m, a.n_reps, a.seed),
    })?;
    write_json(&a.out, &report)
}

fn cmd_blocks(a: &BlocksArgs) -> CliResult {
    let series = ReturnSeries::from_path(&a.input)?;
    if series.skipped > 0 {
        eprintln!("warning: skipped {} malformed rows in {}", series.skipped, series.source);
    }
    if series.is_empty() {
        return Err(CliError::Usage(format!("no usable values in {}", series.source)));
    }
    let report = blocks_estimator(&series, a.block_len, a.quantile, a.seed)?;
    write_json(&a.out, &report)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult {
    let params = a.model.params()?;
    let tail = solve_tail_index(&params)?;
    let chain = GarchTailChain::new(params, tail)?;
    let conditioning = if a.two_sided { Conditioning::TwoSided } else { Conditioning::OneSided };
    let sample = chain.sample(a.m, a.n, conditioning, &mut PathStreams::new(a.seed, a.path));
    match a.out.format {
        Some(Format::Json) => write_json(&a.out, &sample),
        _ => {
            let mut w = open_output(&a.out)?;
            sample.write_csv(&mut w)?;
            Ok(())
        }
    }
}

fn cmd_oracle(a: &OracleArgs) -> CliResult {
    let params = a.model.params()?;
    let mut config = PathSimConfig::new(params, a.length, a.quantile, a.seed);
    config.burn_in = a.burn_in;
    let e = with_workers(a.workers, || conditional_empirics(&config, a.h, a.m))?;
    eprintln!("threshold {} with {} exceedances", e.x, e.n_exceed);
    write_json(&a.out, &e.summary(params))
}

fn cmd_counterexample(a: &CounterexampleArgs) -> CliResult {
    let summary = accumulation_point_experiment(a.c, a.levels)?;
    match a.out.format {
        Some(Format::Json) => write_json(&a.out, &summary),
        _ => {
            let mut w = open_output(&a.out)?;
            summary.write_csv(&mut w)?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Alpha(a) => cmd_alpha(a),
        Command::Table1(a) => cmd_table1(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Blocks(a) => cmd_blocks(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Counterexample(a) => cmd_counterexample(a),
    }
}

fn main() -> ExitCode {
    let argv = match config::merge_config(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.kind() == io::ErrorKind::InvalidData { 2 } else { 3 });
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
