//! `solimbt` command-line tool: generate benchmark systems, run reduction
//! jobs, and compare models in the frequency and time domains.
//!
//! Exit codes: 0 success, 1 input/output problem, 2 invalid configuration
//! or arguments, 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use solimbt::pipeline::FrequencyUnit;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<solimbt::Error> for CliError {
    fn from(e: solimbt::Error) -> Self {
        use solimbt::Error::*;
        match e {
            Io(_) | MatrixMarket(_) | DimensionMismatch(_) => CliError::io(e.to_string()),
            InvalidParams(_) | InvalidBand(_) | InvalidWindow(_) | GammaOutOfRange { .. } => {
                CliError::config(e.to_string())
            }
            _ => CliError::numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "solimbt", version, about = "Limited balanced truncation for second-order systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a benchmark system bundle.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run the reduction job described by a JSON config file.
    Reduce { config: PathBuf },
    /// Frequency-domain comparison of a reduced model with the original.
    Analyze(AnalyzeArgs),
    /// Simulate a model from rest, optionally against a reference model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Single chain oscillator.
    Chain(ChainArgs),
}

#[derive(Debug, Args)]
struct ChainArgs {
    #[arg(long)]
    masses: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    mass: f64,
    #[arg(long, default_value_t = 2.0)]
    coupling_stiffness: f64,
    #[arg(long, default_value_t = 5.0)]
    coupling_damping: f64,
    #[arg(long, default_value_t = 4.0)]
    ground_stiffness_end: f64,
    #[arg(long, default_value_t = 2.0)]
    ground_stiffness_interior: f64,
    #[arg(long, default_value_t = 10.0)]
    ground_damping_end: f64,
    #[arg(long, default_value_t = 5.0)]
    ground_damping_interior: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Hz,
    Rad,
}

impl From<UnitArg> for FrequencyUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Hz => FrequencyUnit::Hz,
            UnitArg::Rad => FrequencyUnit::RadS,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Bundle of the original model.
    #[arg(long)]
    orig: PathBuf,
    /// Bundle of the reduced model.
    #[arg(long)]
    rom: PathBuf,
    #[arg(long)]
    wmin: f64,
    #[arg(long)]
    wmax: f64,
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Band of interest as `lo:hi`; repeat for several intervals.
    #[arg(long = "band", value_name = "LO:HI")]
    bands: Vec<String>,
    #[arg(long, value_enum, default_value = "hz")]
    unit: UnitArg,
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignalKind {
    Zero,
    Step,
    Sin,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "step")]
    signal: SignalKind,
    /// JSON signal description; overrides --signal and its parameters.
    #[arg(long)]
    signal_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Angular frequency of the sine in rad/s.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.0)]
    onset: f64,
    #[arg(long)]
    offset: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    tf: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Time range of interest `t0:tf` for the local maxima.
    #[arg(long, value_name = "T0:TF")]
    window: Option<String>,
    /// Bundle whose outputs the model is compared against.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SOLIMBT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("SOLIMBT_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Generate {
            kind: GenerateKind::Chain(args),
        } => commands::generate_chain(&args),
        Command::Reduce { config } => commands::reduce(&config),
        Command::Analyze(args) => commands::analyze(&args),
        Command::Simulate(args) => commands::simulate(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
