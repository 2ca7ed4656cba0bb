use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use series_invert::{Precision, RingMode, DEFAULT_BASE_STEP};

use crate::error::CliError;
use crate::report::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Revert,
    Burmann,
    Jet,
    Verify,
    Bench,
    Corpus,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Revert => "revert",
            Command::Burmann => "burmann",
            Command::Jet => "jet",
            Command::Verify => "verify",
            Command::Bench => "bench",
            Command::Corpus => "corpus",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Command::Revert,
            Command::Burmann,
            Command::Jet,
            Command::Verify,
            Command::Bench,
            Command::Corpus,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Where the function under study comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSource {
    Expression(String),
    CoeffsFile(PathBuf),
    Corpus(String),
}

impl FunctionSource {
    pub fn kind(&self) -> &'static str {
        match self {
            FunctionSource::Expression(_) => "expression",
            FunctionSource::CoeffsFile(_) => "coeffs",
            FunctionSource::Corpus(_) => "corpus",
        }
    }

    pub fn value(&self) -> String {
        match self {
            FunctionSource::Expression(s) | FunctionSource::Corpus(s) => s.clone(),
            FunctionSource::CoeffsFile(p) => p.display().to_string(),
        }
    }
}

impl fmt::Display for FunctionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind(), self.value())
    }
}

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<FunctionSource>,
    /// Outer series `H` for `burmann`, as formula text.
    pub outer: Option<String>,
    pub order: Option<usize>,
    pub mode: Option<RingMode>,
    pub windows: Vec<[f64; 2]>,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Orders timed by `bench`.
    pub bench_orders: Vec<usize>,
    pub base_step: f64,
    /// Ignore exact series and measure the jet by finite differences.
    pub numeric_jet: bool,
    pub precision: Precision,
}

pub const DEFAULT_ORDER: usize = 8;
pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_BENCH_ORDERS: [usize; 4] = [32, 64, 128, 256];

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            source: None,
            outer: None,
            order: None,
            mode: None,
            windows: Vec::new(),
            samples: DEFAULT_SAMPLES,
            out: None,
            format: Format::Json,
            bench_orders: DEFAULT_BENCH_ORDERS.to_vec(),
            base_step: DEFAULT_BASE_STEP,
            numeric_jet: false,
            precision: Precision::DoubleDouble,
        }
    }

    pub fn with_source(mut self, source: FunctionSource) -> RunConfig {
        self.source = Some(source);
        self
    }

    pub fn with_order(mut self, order: usize) -> RunConfig {
        self.order = Some(order);
        self
    }

    pub fn with_mode(mut self, mode: RingMode) -> RunConfig {
        self.mode = Some(mode);
        self
    }

    pub fn with_windows(mut self, windows: Vec<[f64; 2]>) -> RunConfig {
        self.windows = windows;
        self
    }

    /// Checks combinations that the flag parser cannot.
    pub fn validate(&self) -> Result<(), CliError> {
        let needs_source = matches!(
            self.command,
            Command::Revert | Command::Burmann | Command::Jet | Command::Verify
        );
        if needs_source && self.source.is_none() {
            return Err(CliError::Input(format!(
                "`{}` needs one of --function, --coeffs or --corpus",
                self.command.as_str()
            )));
        }
        if self.command == Command::Burmann && self.outer.is_none() {
            return Err(CliError::Input("`burmann` needs --outer".into()));
        }
        for w in &self.windows {
            if !(w[0] > 0.0 && w[0] < w[1] && w[1].is_finite()) {
                return Err(CliError::Input(format!(
                    "window [{}, {}] must satisfy 0 < A < B",
                    w[0], w[1]
                )));
            }
        }
        if self.samples < 8 {
            return Err(CliError::Input(format!(
                "--samples must be at least 8, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Parses `SERIES_INVERT_THREADS`: unset, empty, or 0 mean automatic.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Input(format!(
                "SERIES_INVERT_THREADS must be a non-negative integer, got `{v}`"
            ))),
        },
    }
}
