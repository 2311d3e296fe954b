//! `qisg`: derive quasi-interpolation schemes, recover functions from sparse
//! grid samples, and run rate and witness experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qisg", version, about = "B-spline quasi-interpolation on Smolyak sparse grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive the exact symbols of a mask and write the scheme file.
    DeriveScheme {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recover R_m(f) from grid samples or a builtin function.
    Recover(RecoverArgs),
    /// Measure ‖f - R_m f‖_q over a level range and fit the decay rate.
    Benchmark(BenchmarkArgs),
    /// Check the fooling functions g1 / g2 against the sample grid.
    Witness(WitnessArgs),
    /// Export the sample grid, or tabulate its size over a level range.
    Grid(GridArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// B-spline order ℓ; selects the builtin of that order, or is checked against the scheme.
    #[arg(long)]
    pub ell: Option<u32>,
    /// Builtin scheme: faber (ℓ = 2) or cubic (ℓ = 4).
    #[arg(long, conflicts_with = "mask")]
    pub builtin: Option<String>,
    /// JSON mask file `{"ell": 4, "lambda": ["-1/6", "4/3", "-1/6"]}`.
    #[arg(long, value_name = "FILE")]
    pub mask: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Directory for output files; created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct LevelArgs {
    /// Single level m.
    #[arg(long, conflicts_with = "m_range")]
    pub m: Option<u32>,
    /// Inclusive level range, `LO..HI`.
    #[arg(long, value_name = "LO..HI", value_parser = io::parse_range)]
    pub m_range: Option<(u32, u32)>,
}

#[derive(Args, Debug)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub m: u32,
    /// Builtin target: sine, product-sine, abs-sine or kink.
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    pub function: Option<String>,
    /// CSV `x_1,..,x_d,value` covering the sample grid.
    #[arg(long, value_name = "FILE")]
    pub samples: Option<PathBuf>,
    /// CSV `x_1,..,x_d` of evaluation points; defaults to the sample grid.
    #[arg(long, value_name = "FILE", conflicts_with = "resolution")]
    pub eval: Option<PathBuf>,
    /// Evaluate on the uniform grid with this many points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, value_name = "LO..HI", value_parser = io::parse_range, default_value = "3..7")]
    pub m_range: (u32, u32),
    #[arg(long, default_value_t = 2.0, value_parser = io::parse_exponent)]
    pub p: f64,
    /// Error norm exponent; `inf` for the sup norm.
    #[arg(long, default_value_t = 2.0, value_parser = io::parse_exponent)]
    pub q: f64,
    /// Effective mixed smoothness of the fixture.
    #[arg(long, default_value_t = 1.25)]
    pub r: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Quadrature points per axis (d ≤ 3) or QMC samples (d > 3).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Fixture phases; `auto` is coherent when q > p.
    #[arg(long, value_enum, default_value = "auto")]
    pub fixture: FixtureArg,
    /// Hyperbolic-cross truncation of the fixture.
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Fit planted synthetic errors instead of running the recovery.
    #[arg(long)]
    pub selftest: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FixtureArg {
    Auto,
    Random,
    Coherent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WitnessArg {
    G1,
    G2,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum)]
    pub kind: WitnessArg,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[arg(long, default_value_t = 1.25)]
    pub r: f64,
    #[arg(long, default_value_t = 2.0, value_parser = io::parse_exponent)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0, value_parser = io::parse_exponent)]
    pub q: f64,
    /// Quadrature points per finest knot interval.
    #[arg(long, default_value_t = 4)]
    pub oversample: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::DeriveScheme { scheme, output } => commands::derive_scheme(&scheme, &output),
        Command::Recover(args) => commands::recover(&args),
        Command::Benchmark(args) => commands::benchmark(&args),
        Command::Witness(args) => commands::witness(&args),
        Command::Grid(args) => commands::grid(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.kind as u8)
        }
    }
}
