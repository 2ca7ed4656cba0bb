use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand};
use series_invert::{Precision, RingMode, DEFAULT_BASE_STEP};
use series_invert_cli::{
    configure_threads, emit_report, run, thread_count, CliError, Command, Format, FunctionSource,
    RunConfig,
};

#[derive(Parser)]
#[command(
    name = "series-invert",
    version,
    about = "Power series reversion and smooth-case remainder checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Revert a series with the Lagrange, Newton and triangular algorithms
    Revert(Opts),
    /// Coefficients of H(f^-1(y)) by the Lagrange-Bürmann formula
    Burmann(Opts),
    /// Measure the jet at 0 and the inverse Taylor polynomial
    Jet(Opts),
    /// Fit the decay order of the inversion remainder over nested windows
    Verify(Opts),
    /// Time the three reversion algorithms in both coefficient rings
    Bench(Opts),
    /// List the shipped test functions, or show one
    Corpus(Opts),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").args(["expr", "function", "coeffs", "corpus"]).multiple(false)))]
struct Opts {
    /// Formula in x (same as --function)
    expr: Option<String>,
    /// Formula in x, e.g. "x*exp(x)"
    #[arg(long, value_name = "TEXT")]
    function: Option<String>,
    /// Series JSON file {"order", "mode", "coeffs"}
    #[arg(long, value_name = "PATH")]
    coeffs: Option<PathBuf>,
    /// Name of a corpus entry
    #[arg(long, value_name = "NAME")]
    corpus: Option<String>,
    /// Outer formula H for burmann
    #[arg(long, value_name = "TEXT")]
    outer: Option<String>,
    /// Truncation order N
    #[arg(long, short = 'n', value_name = "N")]
    order: Option<usize>,
    /// Coefficient ring: rational or float
    #[arg(long)]
    mode: Option<RingMode>,
    /// Sampling window [A, B]; repeat for windows moving toward 0
    #[arg(long, num_args = 2, value_names = ["A", "B"], action = ArgAction::Append)]
    window: Vec<f64>,
    /// Samples per window
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Output file (standard output if absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: json or csv
    #[arg(long, default_value_t = Format::Json)]
    format: Format,
    /// Orders timed by bench, comma-separated
    #[arg(long, value_delimiter = ',', value_name = "N,...")]
    orders: Vec<usize>,
    /// Finite-difference base step
    #[arg(long, default_value_t = DEFAULT_BASE_STEP)]
    base_step: f64,
    /// Measure the jet by finite differences even when it is known exactly
    #[arg(long)]
    numeric_jet: bool,
    /// Oracle precision for remainders: double-double or binary64
    #[arg(long, default_value = "double-double", value_parser = parse_precision)]
    precision: Precision,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    match s {
        "double-double" => Ok(Precision::DoubleDouble),
        "binary64" => Ok(Precision::Binary64),
        other => Err(format!(
            "unknown precision `{other}` (expected double-double or binary64)"
        )),
    }
}

fn to_config(command: Command, o: Opts) -> RunConfig {
    let source = o
        .expr
        .or(o.function)
        .map(FunctionSource::Expression)
        .or(o.coeffs.map(FunctionSource::CoeffsFile))
        .or(o.corpus.map(FunctionSource::Corpus));
    let mut config = RunConfig::new(command);
    config.source = source;
    config.outer = o.outer;
    config.order = o.order;
    config.mode = o.mode;
    config.windows = o.window.chunks(2).map(|w| [w[0], w[1]]).collect();
    config.samples = o.samples;
    config.out = o.out;
    config.format = o.format;
    if !o.orders.is_empty() {
        config.bench_orders = o.orders;
    }
    config.base_step = o.base_step;
    config.numeric_jet = o.numeric_jet;
    config.precision = o.precision;
    config
}

fn execute(config: &RunConfig) -> Result<(), CliError> {
    configure_threads(thread_count(
        std::env::var("SERIES_INVERT_THREADS").ok().as_deref(),
    )?);
    let report = run(config)?;
    emit_report(&report, config.format, config.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 3,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, opts) = match cli.command {
        Cmd::Revert(o) => (Command::Revert, o),
        Cmd::Burmann(o) => (Command::Burmann, o),
        Cmd::Jet(o) => (Command::Jet, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Bench(o) => (Command::Bench, o),
        Cmd::Corpus(o) => (Command::Corpus, o),
    };
    let config = to_config(command, opts);
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
